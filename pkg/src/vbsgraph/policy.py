from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class NumericPolicy:
    """Single place for every numerical threshold used by the package.

    Attributes
    ----------
    zero_rel : float
        An eigenvalue of a density matrix counts as zero when it is at most
        ``dim * zero_rel * max_eigenvalue``.
    zero_abs : float or None
        Absolute override of the zero threshold (CLI ``--tol``).
    hermiticity_tol : float
        Max-entry tolerance for ``A - A^dagger``.
    null_rel : float
        Hamiltonian eigenvalues ``<= null_rel * ||H||`` belong to the null space.
    residual_tol : float
        Absolute tolerance for Theorem residuals ``||H_b |lambda>||``.
    idempotency_drift : float
        Hard error threshold for ``||pi^2 - pi||_max`` of Casimir projectors.
    max_dim : int
        Hilbert space dimension guard.
    dense_null_max : int
        Largest dimension for which null spaces use dense diagonalisation.
    """

    zero_rel: float = 1e-12
    zero_abs: float | None = None
    hermiticity_tol: float = 1e-12
    null_rel: float = 1e-8
    residual_tol: float = 1e-8
    idempotency_drift: float = 1e-8
    max_dim: int = 2**24
    dense_null_max: int = 4096

    def zero_threshold(self, dim: int, max_eigenvalue: float) -> float:
        if self.zero_abs is not None:
            return float(self.zero_abs)
        return dim * self.zero_rel * max(float(max_eigenvalue), 0.0)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_POLICY = NumericPolicy()
