# neurite_growth/core/discretization.py
# Finite volume semi-discretization on the frozen interval y = x/L in (0, 1):
# grid, diffusion operator, Lax-Friedrichs convection and reaction terms
# Does NOT advance time, only evaluates operators and residuals

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .model import (
    Direction, DimensionlessParams, ModelFunctions, NeuriteField,
    boundary_fluxes, convective_velocity,
)

logger = logging.getLogger(__name__)


class GridError(ValueError):
    """Grid too small for an operator, or grids that are not nested"""


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Equidistant cells on [0, 1]"""

    n_cells: int
    h: float = field(init=False)
    face_coords: np.ndarray = field(init=False)
    center_coords: np.ndarray = field(init=False)

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise GridError(f"n_cells must be a positive integer, got {self.n_cells}")
        faces = np.linspace(0.0, 1.0, self.n_cells + 1)
        centers = 0.5 * (faces[:-1] + faces[1:])
        faces.setflags(write=False)
        centers.setflags(write=False)
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "h", 1.0 / self.n_cells)
        object.__setattr__(self, "face_coords", faces)
        object.__setattr__(self, "center_coords", centers)

    def refine(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.n_cells * factor)

    def __repr__(self) -> str:
        return f"Grid1D(n_cells={self.n_cells})"


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Rows sub[k]*f[k-1] + diag[k]*f[k] + sup[k]*f[k+1]; sub[0] and sup[-1] are unused"""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    def apply(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        out = self.diag.reshape((-1,) + (1,) * (f.ndim - 1)) * f
        out[1:] += self.sub[1:].reshape((-1,) + (1,) * (f.ndim - 1)) * f[:-1]
        out[:-1] += self.sup[:-1].reshape((-1,) + (1,) * (f.ndim - 1)) * f[1:]
        return out

    def to_dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.sub[1:], -1) + np.diag(self.sup[:-1], 1))

    def row_sums(self) -> np.ndarray:
        return self.apply(np.ones(self.size))

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.sub[1:], self.sup[:-1]))


def assemble_diffusion(grid: Grid1D) -> TridiagonalOperator:
    """Neumann diffusion matrix with stencil (-1, 2, -1)/h, boundary rows (1, -1)/h"""
    n = grid.n_cells
    if n < 3:
        raise GridError(f"Diffusion needs at least 3 cells, got {n}")
    inv_h = 1.0 / grid.h
    diag = np.full(n, 2.0 * inv_h)
    diag[0] = diag[-1] = inv_h
    off = np.full(n, -inv_h)
    sub = off.copy()
    sub[0] = 0.0
    sup = off.copy()
    sup[-1] = 0.0
    return TridiagonalOperator(sub=sub, diag=diag, sup=sup)


def lax_friedrichs_face_flux(v_L, v_R, f_L, f_R):
    return 0.5 * (v_L * f_L + v_R * f_R) - 0.5 * (f_R - f_L)


def convective_residual(fld: NeuriteField, L: float, dLdt: float, lambda_som: float,
                        lambda_j: float, mf: ModelFunctions, p: DimensionlessParams,
                        grid: Grid1D, j: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Convective part of df±/dt including the 1/(hL) factor"""
    fp, fm = fld.f_plus, fld.f_minus
    n = fld.n_cells
    flux_plus = np.empty(n + 1)
    flux_minus = np.empty(n + 1)

    if n > 1:
        y = grid.face_coords[1:-1]
        rho = fp + fm
        rho_face = 0.5 * (rho[:-1] + rho[1:])
        v_plus = convective_velocity(y, rho_face, L, dLdt, Direction.ANTERO, p)
        v_minus = convective_velocity(y, rho_face, L, dLdt, Direction.RETRO, p)
        flux_plus[1:-1] = lax_friedrichs_face_flux(v_plus, v_plus, fp[:-1], fp[1:])
        flux_minus[1:-1] = lax_friedrichs_face_flux(v_minus, v_minus, fm[:-1], fm[1:])

    bf = boundary_fluxes(fld, lambda_som, lambda_j, mf, j)
    flux_plus[0] = p.kappa_alpha_plus[j] * bf.inflow_left
    flux_plus[-1] = p.kappa_beta_plus[j] * bf.outflow_right
    flux_minus[0] = -p.kappa_beta_minus[j] * bf.outflow_left
    flux_minus[-1] = -p.kappa_alpha_minus[j] * bf.inflow_right

    scale = 1.0 / (grid.h * L)
    return (scale * (flux_plus[:-1] - flux_plus[1:]),
            scale * (flux_minus[:-1] - flux_minus[1:]))


def reaction_geometric_residual(fld: NeuriteField, L: float, dLdt: float,
                                p: DimensionlessParams) -> Tuple[np.ndarray, np.ndarray]:
    """Exchange between directions and dilution under growth"""
    fp, fm = fld.f_plus, fld.f_minus
    dilution = dLdt / L
    exchange = p.kappa_lambda * (fm - fp)
    return exchange - dilution * fp, -exchange - dilution * fm


def project_conservative(values: np.ndarray, factor: int) -> np.ndarray:
    """Average a fine cell vector onto a grid coarser by an integer factor"""
    values = np.asarray(values, dtype=float)
    if factor < 1 or values.shape[0] % factor != 0:
        raise GridError(f"Grid of {values.shape[0]} cells is not nested with factor {factor}")
    return values.reshape(-1, factor).mean(axis=1)
