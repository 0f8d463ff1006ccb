"""Spin coherent states and a Monte Carlo estimate of the VBS norm.

The norm <VBS|VBS> equals an integral over one classical unit vector per
vertex with weight prod_edges [(1 - n_k . n_l) / 2]^M_kl.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .errors import InsufficientSamplesError, UniquenessViolatedError
from .graph import MultiGraph, SpinAssignment, check_uniqueness

CHUNK = 1 << 16


@dataclass(frozen=True)
class SphereSample:
    theta: np.ndarray
    phi: np.ndarray

    @property
    def spinor(self) -> tuple[np.ndarray, np.ndarray]:
        u = np.cos(self.theta / 2) * np.exp(0.5j * self.phi)
        v = np.sin(self.theta / 2) * np.exp(-0.5j * self.phi)
        return u, v

    @property
    def unit_vector(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)], axis=-1)


def coherent_state(twice_spin: int, theta: float, phi: float) -> np.ndarray:
    """Amplitudes <S, m | n> in the m = S .. -S basis.

    (u a^+ + v b^+)^{2S} / sqrt((2S)!) |vac> with u = cos(theta/2) e^{i phi/2},
    v = sin(theta/2) e^{-i phi/2}; the n_a = S + m component is
    sqrt(C(2S, S+m)) u^{S+m} v^{S-m}.

    With these half-angle phases <S> points along (theta, -phi). Only overlaps
    between coherent states enter the partition function, and those depend on
    n_k . n_l alone, so the mirror image is harmless.
    """
    if not 0 <= theta <= np.pi:
        raise ValueError("theta must lie in [0, pi]")
    u, v = SphereSample(np.asarray(theta), np.asarray(phi)).spinor
    n = twice_spin
    na = n - np.arange(n + 1)
    binom = np.sqrt([float(comb(n, int(a))) for a in na])
    return binom * u**na * v ** (n - na)


def _resolution_sum(twice_spin: int, thetas, phis, weights) -> np.ndarray:
    n = twice_spin
    na = n - np.arange(n + 1)
    u = np.cos(thetas / 2) * np.exp(0.5j * phis)
    v = np.sin(thetas / 2) * np.exp(-0.5j * phis)
    binom = np.sqrt([float(comb(n, int(a))) for a in na])
    amps = binom[None, :] * u[:, None] ** na[None, :] * v[:, None] ** (n - na)[None, :]
    return (amps * weights[:, None]).T @ amps.conj()


def identity_resolution_check(twice_spin: int, n_samples: int, seed: int) -> float:
    """Max entry deviation of (2S+1) E_uniform[|n><n|] from the identity (Monte Carlo)."""
    if n_samples < 1:
        raise InsufficientSamplesError("need at least one sample")
    rng = np.random.Generator(np.random.Philox(seed))
    dim = twice_spin + 1
    acc = np.zeros((dim, dim), dtype=complex)
    for start in range(0, n_samples, CHUNK):
        m = min(CHUNK, n_samples - start)
        cos_t = rng.uniform(-1.0, 1.0, m)
        phi = rng.uniform(0.0, 2 * np.pi, m)
        acc += _resolution_sum(twice_spin, np.arccos(cos_t), phi, np.ones(m))
    est = dim * acc / n_samples
    return float(np.max(np.abs(est - np.eye(dim))))


def identity_resolution_quadrature(twice_spin: int, n_theta: int | None = None,
                                   n_phi: int | None = None) -> float:
    """Same check with Gauss-Legendre in cos(theta) and a uniform phi grid; exact for these sizes."""
    n_theta = n_theta or twice_spin + 1
    n_phi = n_phi or 2 * twice_spin + 2
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(np.arccos(x), phis, indexing="ij")
    ww = np.repeat(w, n_phi) / (2.0 * n_phi)  # normalised: sum of weights = 1
    dim = twice_spin + 1
    est = dim * _resolution_sum(twice_spin, tt.ravel(), pp.ravel(), ww)
    return float(np.max(np.abs(est - np.eye(dim))))


@dataclass(frozen=True)
class PartitionEstimate:
    mean: float
    standard_error: float
    sample_count: int
    seed: int

    def within(self, exact: float, n_sigma: float = 5.0) -> bool:
        return abs(self.mean - exact) <= n_sigma * self.standard_error


def _chunk_stats(chunk: int, size: int, seed: int, nv: int, edges_idx, mults, log_prefactor):
    # one independent stream per (seed, chunk); chunk boundaries never depend on thread count
    ss = np.random.SeedSequence(seed, spawn_key=(chunk,))
    rng = np.random.Generator(np.random.Philox(ss))
    cos_t = rng.uniform(-1.0, 1.0, (size, nv))
    phi = rng.uniform(0.0, 2 * np.pi, (size, nv))
    sin_t = np.sqrt(1.0 - cos_t**2)
    nvec = np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=-1)
    logw = np.full(size, log_prefactor)
    for (i, j), m in zip(edges_idx, mults):
        x = 0.5 * (1.0 - np.einsum("nk,nk->n", nvec[:, i], nvec[:, j]))
        logw += m * np.log(np.clip(x, 1e-300, None))
    w = np.exp(logw)
    mean = float(w.mean())
    m2 = float(np.sum((w - mean) ** 2))
    return size, mean, m2


def mc_partition(g: MultiGraph, s: SpinAssignment, n_samples: int, seed: int,
                 threads: int = 1) -> PartitionEstimate:
    """Monte Carlo estimate of <VBS|VBS> with independent uniform unit vectors per vertex.

    The measure prod_l (2S_l+1)!/(4 pi) dn_l equals prod_l (2S_l+1)! times the
    uniform probability measure (each sphere has area 4 pi), so every sample
    carries the weight prod_l (2S_l+1)! * prod_edges [(1 - n_k . n_l)/2]^M_kl.
    """
    if n_samples < 2:
        raise InsufficientSamplesError("need at least two samples for an error bar")
    ok, residual = check_uniqueness(g, s)
    if not ok:
        raise UniquenessViolatedError(f"spins violate 2S = I.M (residual {residual.tolist()})")
    pos = {v: i for i, v in enumerate(g.vertices)}
    edges_idx = [(pos[k], pos[l]) for k, l, _ in g.edges]
    mults = [m for _, _, m in g.edges]
    log_pref = sum(float(np.log(float(factorial(s[v] + 1)))) for v in g.vertices)

    sizes = [min(CHUNK, n_samples - start) for start in range(0, n_samples, CHUNK)]
    jobs = [(c, size, seed, g.n_vertices, edges_idx, mults, log_pref) for c, size in enumerate(sizes)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(lambda a: _chunk_stats(*a), jobs))
    else:
        stats = [_chunk_stats(*a) for a in jobs]

    # pairwise-combined running mean / M2 in chunk order
    n_tot, mean, m2 = 0, 0.0, 0.0
    for n, mu, q in stats:
        delta = mu - mean
        tot = n_tot + n
        mean += delta * n / tot
        m2 += q + delta**2 * n_tot * n / tot
        n_tot = tot
    std = np.sqrt(m2 / (n_tot - 1))
    return PartitionEstimate(float(mean), float(std / np.sqrt(n_tot)), n_tot, int(seed))
