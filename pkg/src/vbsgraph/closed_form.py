"""Closed-form results for open VBS chains, used to cross-check the numerics.

Exact rational arithmetic throughout; floats appear only when comparing with
a numerical spectrum. The general eigenvalue formulas contain polynomials
that are defined elsewhere by recurrences and are not reproduced here, so
generic chains are checked through structure: (2J+1)-fold multiplets for
J = |J_-| .. J_+, the eigenvalue count, and the fact that every deviation from
1/deg is a fixed linear combination of the decay products
prod_j lambda(l, M_j) across chains that share end multiplicities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, prod
from typing import Sequence

import numpy as np

from .errors import LOutOfRangeError, SpectrumMismatchError
from .graph import MultiGraph, spin_chain


def basic_chain_eigenvalues(n_block: int) -> tuple[Fraction, Fraction]:
    """(Lambda_0, Lambda_1) of a spin-1 block of ``n_block`` sites; Lambda_1 is threefold."""
    if n_block < 1:
        raise ValueError("block length must be at least 1")
    q = Fraction(-1, 3) ** n_block
    return Fraction(1, 4) * (1 + 3 * q), Fraction(1, 4) * (1 - q)


def lambda_lm(l: int, m: int) -> Fraction:
    """(-1)^l M! (M+1)! / ((M-l)! (M+l+1)!)."""
    if not 0 <= l <= m:
        raise LOutOfRangeError(f"need 0 <= l <= {m}, got l={l}")
    return Fraction((-1) ** l * factorial(m) * factorial(m + 1),
                    factorial(m - l) * factorial(m + l + 1))


def lambda_ls(l: int, s: int) -> Fraction:
    """Same factorial form with the bulk spin S of a homogeneous chain."""
    return lambda_lm(l, s)


@dataclass(frozen=True)
class ChainSpec:
    """Open chain seen from a block of ``len(internal) + 1`` sites.

    ``internal`` lists the block's bond multiplicities left to right, ``left`` and
    ``right`` the multiplicities of the two cut bonds.
    """

    internal: tuple[int, ...]
    left: int
    right: int
    pad: int = 1

    def __post_init__(self):
        object.__setattr__(self, "internal", tuple(int(m) for m in self.internal))
        if any(m < 1 for m in self.internal) or self.left < 1 or self.right < 1:
            raise ValueError("multiplicities must be positive")

    @classmethod
    def homogeneous(cls, spin: int, n_block: int, pad: int = 1) -> "ChainSpec":
        return cls((spin,) * (n_block - 1), spin, spin, pad)

    @classmethod
    def basic(cls, n_block: int, pad: int = 1) -> "ChainSpec":
        return cls.homogeneous(1, n_block, pad)

    @property
    def n_block(self) -> int:
        return len(self.internal) + 1

    @property
    def min_internal(self) -> int | None:
        return min(self.internal) if self.internal else None

    @property
    def is_basic(self) -> bool:
        return self.left == self.right == 1 and all(m == 1 for m in self.internal)

    @property
    def degeneracy(self) -> int:
        return (self.left + 1) * (self.right + 1)

    def multiplets(self) -> list[int]:
        """Doubled total spins 2J of the support: |J_-| .. J_+ in unit steps."""
        return list(range(abs(self.left - self.right), self.left + self.right + 1, 2))

    def graph(self) -> tuple[MultiGraph, tuple[int, ...]]:
        return spin_chain(self.internal, self.left, self.right, self.pad)


def decay_factor(chain: ChainSpec, l: int) -> Fraction:
    """prod over internal bonds of lambda(l, M_j); l may not exceed the smallest internal M."""
    if l < 0:
        raise LOutOfRangeError("l must be non-negative")
    if chain.internal and l > chain.min_internal:
        raise LOutOfRangeError(f"l={l} exceeds the smallest internal multiplicity {chain.min_internal}")
    return prod((lambda_lm(l, m) for m in chain.internal), start=Fraction(1))


def _decay_or_zero(chain: ChainSpec, l: int) -> Fraction:
    # lambda(l, M) vanishes for l > M (its (M-l)! denominator is infinite)
    if chain.internal and l > chain.min_internal:
        return Fraction(0)
    return decay_factor(chain, l)


@dataclass
class ChainReport:
    chain: ChainSpec
    multiplets: dict[int, list[float]]  # 2J -> eigenvalues labelled with that J
    checks: dict[str, bool] = field(default_factory=dict)
    errors: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def table(self) -> str:
        rows = ["2J  mult  expected  min        max"]
        for j2 in sorted(self.multiplets):
            v = self.multiplets[j2]
            rows.append(f"{j2:<3} {len(v):<5} {j2 + 1:<9} {min(v):.12f} {max(v):.12f}")
        return "\n".join(rows)


def group_multiplets(labels: Sequence[tuple[int, float]]) -> dict[int, list[float]]:
    out: dict[int, list[float]] = {}
    for j2, val in labels:
        out.setdefault(j2, []).append(val)
    return out


def verify_chain_spectrum(chain: ChainSpec, labels: Sequence[tuple[int, float]],
                          tol: float = 1e-8, strict: bool = False) -> ChainReport:
    """Compare a labelled numerical support spectrum with the chain's closed-form structure.

    ``labels`` is the output of :func:`vbsgraph.density.spin_multiplets`: one
    ``(2J, eigenvalue)`` pair per support eigenvector.
    """
    groups = group_multiplets(labels)
    rep = ChainReport(chain, groups)
    expected = chain.multiplets()
    rep.checks["count"] = len(labels) == chain.degeneracy
    rep.checks["multiplet_labels"] = sorted(groups) == expected and all(
        len(groups[j2]) == j2 + 1 for j2 in groups
    )
    spread = max((max(v) - min(v) for v in groups.values()), default=0.0)
    rep.errors["m_independence"] = spread
    rep.checks["m_independence"] = spread <= tol
    total = sum(sum(v) for v in groups.values())
    rep.errors["trace"] = abs(total - 1.0)
    rep.checks["trace"] = rep.errors["trace"] <= tol
    if chain.is_basic:
        l0, l1 = (float(x) for x in basic_chain_eigenvalues(chain.n_block))
        err = max(
            max((abs(v - l0) for v in groups.get(0, [])), default=np.inf),
            max((abs(v - l1) for v in groups.get(2, [])), default=np.inf),
        )
        rep.errors["basic_formula"] = err
        rep.checks["basic_formula"] = err <= min(tol, 1e-10)
    if strict and not rep.ok:
        failed = [k for k, v in rep.checks.items() if not v]
        raise SpectrumMismatchError(f"chain spectrum checks failed: {failed}\n{rep.table()}", rep.table())
    return rep


@dataclass
class DecayFit:
    lmax: int
    coefficients: dict[int, np.ndarray]  # 2J -> c_l(J), l = 1..lmax
    max_residual: float
    n_chains: int

    def polynomial_residual(self) -> dict[int, float]:
        """For each l, how far c_l(J) is from a degree-l polynomial in J(J+1).

        Only meaningful when more than l + 1 distinct J values exist; other
        entries are reported as 0.
        """
        j2s = sorted(self.coefficients)
        x = np.array([j2 * (j2 + 2) / 4 for j2 in j2s])
        out = {}
        for li in range(self.lmax):
            l = li + 1
            y = np.array([self.coefficients[j2][li] for j2 in j2s])
            if len(j2s) <= l + 1:
                out[l] = 0.0
                continue
            fit = np.polynomial.polynomial.Polynomial.fit(x, y, l)
            out[l] = float(np.max(np.abs(fit(x) - y)))
        return out


def fit_decay_structure(chains: Sequence[ChainSpec], multiplet_values: Sequence[dict[int, float]]) -> DecayFit:
    """Least-squares fit of Lambda(J) - 1/deg = sum_l c_l(J) prod_j lambda(l, M_j).

    All chains must share their end multiplicities; ``multiplet_values[i]`` maps
    2J to the eigenvalue of that multiplet for ``chains[i]``. The residual is
    zero (to rounding) exactly when the chains' spectra have the product-decay
    form with chain-independent coefficients.
    """
    ends = {(c.left, c.right) for c in chains}
    if len(ends) != 1:
        raise ValueError("all chains must share their end multiplicities")
    left, right = ends.pop()
    # the sum over l runs to the smallest internal multiplicity of each chain;
    # channels beyond it carry a zero decay product
    lmax = max(max((c.min_internal or 1) for c in chains), 1)
    if len(chains) <= lmax:
        raise ValueError("need more chains than decay channels for a meaningful fit")
    deg = (left + 1) * (right + 1)
    design = np.array([[float(_decay_or_zero(c, l)) for l in range(1, lmax + 1)] for c in chains])
    coefs, worst = {}, 0.0
    for j2 in chains[0].multiplets():
        y = np.array([vals[j2] - 1.0 / deg for vals in multiplet_values])
        c, *_ = np.linalg.lstsq(design, y, rcond=None)
        coefs[j2] = c
        worst = max(worst, float(np.max(np.abs(design @ c - y))))
    return DecayFit(lmax, coefs, worst, len(chains))
