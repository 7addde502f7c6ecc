"""Laplacians, Green functions, and the closed-form determinant identities.

All matrices are dense and restricted to the interior vertices in sorted-id
order, with zero boundary conditions.  Determinants are accumulated as log
determinants from Cholesky factors, so ratios never overflow.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .cover import DoubleCover, build_double_cover
from .network import ElectricalNetwork, GaugeField, InvalidNetworkError


@dataclass(frozen=True)
class LaplacianMatrix:
    """Interior block of -Laplacian: diagonal W(x), off-diagonal -sigma*C."""

    interior_order: tuple[str, ...]
    entries: np.ndarray
    kind: str  # "untwisted" | "twisted" | "cover"

    def cholesky(self) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.entries)
        except np.linalg.LinAlgError as exc:
            raise InvalidNetworkError(
                [f"{self.kind} Laplacian is not positive definite: {exc}"]) from exc

    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.cholesky()))))


@dataclass(frozen=True)
class GreenMatrix:
    interior_order: tuple[str, ...]
    entries: np.ndarray
    kind: str
    asymmetry: float  # max |G - G^T| before symmetrization

    def value(self, x: str, y: str) -> float:
        i = self.interior_order.index(x)
        j = self.interior_order.index(y)
        return float(self.entries[i, j])


def _assemble(network: ElectricalNetwork, gauge: GaugeField | None, kind: str) -> LaplacianMatrix:
    order = network.interior
    idx = {v: i for i, v in enumerate(order)}
    m = len(order)
    a = np.zeros((m, m))
    for v in order:
        a[idx[v], idx[v]] = network.weighted_degree(v)
    for (u, v), e in network.edge_map.items():
        if u in idx and v in idx:
            s = 1 if gauge is None else gauge.signs[(u, v)]
            a[idx[u], idx[v]] = -s * e.conductance
            a[idx[v], idx[u]] = -s * e.conductance
    lap = LaplacianMatrix(order, a, kind)
    lap.cholesky()  # positive definiteness is part of the contract
    return lap


def laplacian(network: ElectricalNetwork) -> LaplacianMatrix:
    return _assemble(network, None, "untwisted")


def twisted_laplacian(network: ElectricalNetwork, gauge: GaugeField) -> LaplacianMatrix:
    if gauge.network != network:
        raise ValueError("gauge field belongs to a different network")
    return _assemble(network, gauge, "twisted")


def _invert(lap: LaplacianMatrix, kind: str) -> GreenMatrix:
    try:
        cho = sla.cho_factor(lap.entries, lower=True)
    except np.linalg.LinAlgError as exc:
        raise InvalidNetworkError([f"singular {kind} Laplacian"]) from exc
    g = sla.cho_solve(cho, np.eye(len(lap.interior_order)))
    asym = float(np.max(np.abs(g - g.T))) if g.size else 0.0
    g = 0.5 * (g + g.T)
    return GreenMatrix(lap.interior_order, g, kind, asym)


def green(network: ElectricalNetwork) -> GreenMatrix:
    """Inverse of the interior -Laplacian block (zero boundary conditions)."""
    return _invert(laplacian(network), "untwisted")


def twisted_green(network: ElectricalNetwork, gauge: GaugeField) -> GreenMatrix:
    """Inverse of the twisted block; off-diagonal entries may be negative."""
    return _invert(twisted_laplacian(network, gauge), "twisted")


def cover_laplacian(cover: DoubleCover) -> LaplacianMatrix:
    return _assemble(cover.cover_network, None, "cover")


def cover_green(cover: DoubleCover) -> GreenMatrix:
    return _invert(cover_laplacian(cover), "cover")


def det_ratio(network: ElectricalNetwork, gauge: GaugeField) -> float:
    """sqrt(det G_sigma / det G), computed from Laplacian log determinants.

    Always in (0, 1]; equals 1 exactly when no interior cycle has holonomy -1.
    """
    ld = laplacian(network).log_det()
    ld_s = twisted_laplacian(network, gauge).log_det()
    return float(np.exp(0.5 * (ld - ld_s)))


def loop_mass(network: ElectricalNetwork) -> float:
    """log(det G * prod W): total measure of loops visiting >= 2 vertices."""
    lw = sum(np.log(network.weighted_degree(v)) for v in network.interior)
    return float(lw - laplacian(network).log_det())


def twisted_loop_mass(network: ElectricalNetwork, gauge: GaugeField) -> float:
    """Same with the twisted Green function; the signed-measure total."""
    lw = sum(np.log(network.weighted_degree(v)) for v in network.interior)
    return float(lw - twisted_laplacian(network, gauge).log_det())


def negative_holonomy_mass(network: ElectricalNetwork, gauge: GaugeField) -> float:
    """Loop measure of {holonomy -1}: half the gap between the two masses.

    Satisfies det_ratio = exp(-negative_holonomy_mass).
    """
    return 0.5 * (loop_mass(network) - twisted_loop_mass(network, gauge))


@dataclass(frozen=True)
class CoverGreenReport:
    """Residuals of the sheet-sum and sheet-difference Green identities."""

    residual_untwisted: float  # max |G - (G_11 + G_12)|
    residual_twisted: float    # max |G_sigma - (G_11 - G_12)|
    residual_deck: float       # max |G^db(psi ., psi .) - G^db|


def cover_green_relations(network: ElectricalNetwork, gauge: GaugeField) -> CoverGreenReport:
    """Check G = G11 + G12 and G_sigma = G11 - G12 on the double cover."""
    cov = build_double_cover(network, gauge)
    g = green(network)
    gs = twisted_green(network, gauge)
    gdb = cover_green(cov)
    idx = {v: i for i, v in enumerate(gdb.interior_order)}
    base_idx = {v: i for i, v in enumerate(g.interior_order)}
    m = len(g.interior_order)
    g11 = np.zeros((m, m))
    g12 = np.zeros((m, m))
    for x in g.interior_order:
        for y in g.interior_order:
            i, j = base_idx[x], base_idx[y]
            g11[i, j] = gdb.entries[idx[cov.lift(x, 1)], idx[cov.lift(y, 1)]]
            g12[i, j] = gdb.entries[idx[cov.lift(x, 1)], idx[cov.lift(y, 2)]]
    res_u = float(np.max(np.abs(g.entries - (g11 + g12)))) if m else 0.0
    res_t = float(np.max(np.abs(gs.entries - (g11 - g12)))) if m else 0.0
    deck = np.zeros_like(gdb.entries)
    for a in gdb.interior_order:
        for b in gdb.interior_order:
            deck[idx[a], idx[b]] = gdb.entries[idx[cov.deck[a]], idx[cov.deck[b]]]
    res_d = float(np.max(np.abs(deck - gdb.entries))) if gdb.entries.size else 0.0
    return CoverGreenReport(res_u, res_t, res_d)


def subspace_determinants(network: ElectricalNetwork, gauge: GaugeField) -> tuple[float, float]:
    """Determinants of the cover -Laplacian on the symmetric/antisymmetric parts.

    The two subspaces are spanned by (e_{x,1} +- e_{x,2})/sqrt(2) over the
    sheet-1 interior fundamental domain; they are stable under the operator
    and the determinants equal 1/det G and 1/det G_sigma respectively.
    """
    cov = build_double_cover(network, gauge)
    lap = cover_laplacian(cov)
    idx = {v: i for i, v in enumerate(lap.interior_order)}
    base_int = network.interior
    m = len(base_int)
    bp = np.zeros((len(lap.interior_order), m))
    bm = np.zeros((len(lap.interior_order), m))
    for j, x in enumerate(base_int):
        i1, i2 = idx[cov.lift(x, 1)], idx[cov.lift(x, 2)]
        bp[i1, j] = bp[i2, j] = 1.0 / np.sqrt(2.0)
        bm[i1, j] = 1.0 / np.sqrt(2.0)
        bm[i2, j] = -1.0 / np.sqrt(2.0)
    a_plus = bp.T @ lap.entries @ bp
    a_minus = bm.T @ lap.entries @ bm
    det_plus = float(np.exp(LaplacianMatrix(base_int, a_plus, "cover").log_det()))
    det_minus = float(np.exp(LaplacianMatrix(base_int, a_minus, "cover").log_det()))
    return det_plus, det_minus


def write_csv(matrix: GreenMatrix | LaplacianMatrix, path) -> None:
    """Dump a matrix as CSV with a header row of interior vertex ids."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", *matrix.interior_order])
        for v, row in zip(matrix.interior_order, matrix.entries):
            w.writerow([v, *(repr(float(x)) for x in row)])


def gauge_covariance_residual(network: ElectricalNetwork, gauge: GaugeField,
                              vs) -> float:
    """max |G_{vs.sigma}(x,y) - vs(x) G_sigma(x,y) vs(y)| over interior pairs."""
    from .gauge import apply_gauge_transform

    transformed = apply_gauge_transform(vs, gauge)
    g1 = twisted_green(network, transformed)
    g0 = twisted_green(network, gauge)
    s = np.array([vs.signs[v] for v in g0.interior_order], dtype=float)
    conj = s[:, None] * g0.entries * s[None, :]
    return float(np.max(np.abs(g1.entries - conj))) if conj.size else 0.0
