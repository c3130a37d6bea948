"""scikit-learn style wrappers around the measure and verification routines.

Both estimators take a list of bodies as ``X``: polytopes, catalog specs such
as ``"cube:3"`` or vertex arrays.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_bodies, check_box, check_nonnegative_int
from .crofton import FORMULAS
from .grassmann_mc import DEFAULT_THRESHOLD, verify
from .tencm import MeasureSpec, phi


class MinkowskiTensorTransformer(TransformerMixin, BaseEstimator):
    """Map each body to the coefficient vector of ``phi_j^{r,s,eps}(P, box)``.

    ``box=None`` gives the global Minkowski tensor.  The output columns follow
    the monomial order of :func:`tencrofton.symtensor.monomials`.
    """

    def __init__(self, j: int = 0, r: int = 0, s: int = 0, eps: int = 0, box=None):
        self.j = j
        self.r = r
        self.s = s
        self.eps = eps
        self.box = box

    def fit(self, X, y=None):
        bodies = check_bodies(X)
        self.n_features_in_ = bodies[0].dim
        self.spec_ = MeasureSpec(self.n_features_in_, check_nonnegative_int("j", self.j),
                                 check_nonnegative_int("r", self.r), check_nonnegative_int("s", self.s),
                                 check_nonnegative_int("eps", self.eps))
        self.box_ = check_box(self.box, self.n_features_in_)
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        bodies = check_bodies(X)
        if bodies[0].dim != self.n_features_in_:
            raise ValueError(f"fitted for dimension {self.n_features_in_}, got {bodies[0].dim}")
        return np.array([phi(P, self.spec_, self.box_).value.to_vector() for P in bodies])


class CroftonVerifier(BaseEstimator):
    """Monte Carlo check of one Crofton formula on each body.

    ``fit`` stores one :class:`~tencrofton.grassmann_mc.VerificationReport`
    per body in ``reports_``; ``score`` is the fraction that passed.
    """

    def __init__(self, formula: str = "thm_j_eq_k", k: int | None = None, j: int | None = None, s: int = 0,
                 i: int = 0, r: int = 0, box=None, samples: int = 100_000, seed: int = 0,
                 workers: int | None = None, threshold: float = DEFAULT_THRESHOLD):
        self.formula = formula
        self.k = k
        self.j = j
        self.s = s
        self.i = i
        self.r = r
        self.box = box
        self.samples = samples
        self.seed = seed
        self.workers = workers
        self.threshold = threshold

    def _run(self, X) -> list:
        if self.formula not in FORMULAS:
            raise ValueError(f"unknown formula {self.formula!r}")
        bodies = check_bodies(X)
        box = check_box(self.box, bodies[0].dim)
        samples = check_nonnegative_int("samples", self.samples, minimum=1)
        return [
            verify(self.formula, P, box=box, r=self.r, samples=samples, seed=self.seed, workers=self.workers,
                   threshold=self.threshold, k=self.k, j=self.j, s=self.s, i=self.i)
            for P in bodies
        ]

    def fit(self, X, y=None):
        self.reports_ = self._run(X)
        self.n_features_in_ = self.reports_[0].params.n
        return self

    def predict(self, X):
        """Pass/fail per body."""
        return np.array([rep.passed for rep in self._run(X)])

    def score(self, X=None, y=None) -> float:
        reports = self.reports_ if X is None else self._run(X)
        return float(np.mean([rep.passed for rep in reports]))
