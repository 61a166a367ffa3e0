"""One-dimensional self-consistent Schrodinger-Poisson solver.

The growth direction runs from the surface (position 0) into the substrate.
The conduction-band edge is measured from the Fermi level (E_F = 0), the
surface edge is pinned and the deep boundary carries zero field.

Self-consistency uses the predictor-corrector scheme of Trellakis et al.
(J. Appl. Phys. 81, 7880, 1997): each outer step solves a nonlinear Poisson
equation in which the subband energies follow the local potential change,
then linearly mixes the corrected potential into the previous one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded
from scipy.special import expit

from .constants import CM3_TO_NM3, HBAR2_2ME, POISSON_COEFF, kT
from .errors import ConfigurationError, ConvergenceError, DomainError, NumericError

log = logging.getLogger(__name__)

# e/eps0 in V nm
_Q_VNM = POISSON_COEFF / 1e3


@dataclass(frozen=True)
class Grid1D:
    positions: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise DomainError("grid needs at least three points")
        dx = np.diff(x)
        if np.any(dx <= 0):
            raise DomainError("grid positions must be strictly increasing")
        if not np.allclose(dx, dx[0], rtol=1e-9, atol=0):
            raise DomainError("grid spacing must be uniform")
        object.__setattr__(self, "positions", x)

    @property
    def spacing(self):
        return float(self.positions[1] - self.positions[0])

    @property
    def midpoints(self):
        x = self.positions
        return 0.5 * (x[1:] + x[:-1])

    def __len__(self):
        return self.positions.size

    @classmethod
    def uniform(cls, start, stop, spacing):
        n = int(round((stop - start) / spacing))
        if n < 2 or not np.isclose(n * spacing, stop - start, rtol=1e-9):
            raise DomainError(f"span {stop - start} nm is not a multiple of spacing {spacing}")
        return cls(np.linspace(start, stop, n + 1))


def _nodes_from_mid(mid):
    """Cell-average node values from midpoint values (half cells at the ends)."""
    node = np.empty(mid.size + 1)
    node[1:-1] = 0.5 * (mid[1:] + mid[:-1])
    node[0], node[-1] = mid[0], mid[-1]
    return node


def _as_mid(profile, grid, name):
    profile = np.asarray(profile, dtype=float)
    if profile.size == len(grid) - 1:
        return profile
    if profile.size == len(grid):
        return 0.5 * (profile[1:] + profile[:-1])
    raise DomainError(f"{name} has {profile.size} samples for a {len(grid)}-point grid")


def _cell_weights(n):
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


@dataclass
class WaferProfiles:
    """Material properties of a wafer sampled on a grid.

    Midpoint arrays (length N-1) are exact layer values; node arrays are
    cell averages so interfaces sitting on nodes get the mean of both sides.
    """

    grid: Grid1D
    offset: np.ndarray  # meV, nodes
    mass_mid: np.ndarray
    eps_mid: np.ndarray
    donors: np.ndarray  # nm^-3, nodes
    well: tuple

    @property
    def mass(self):
        return _nodes_from_mid(self.mass_mid)


def wafer_profiles(wafer, spacing=0.5):
    """Sample ``wafer`` on a uniform grid; layer boundaries must hit nodes."""
    grid = Grid1D.uniform(0.0, wafer.thickness, spacing)
    xm = grid.midpoints
    offset = np.empty_like(xm)
    mass = np.empty_like(xm)
    eps = np.empty_like(xm)
    dop = np.empty_like(xm)
    for layer, (top, bottom) in zip(wafer.layers, wafer.layer_bounds()):
        if not np.isclose(top / spacing, round(top / spacing), atol=1e-9):
            raise DomainError(f"layer boundary at {top} nm is not on the {spacing} nm grid")
        sel = (xm > top) & (xm < bottom)
        a, b = layer.material, layer.grade_to or layer.material
        frac = (xm[sel] - top) / (bottom - top)
        offset[sel] = a.cb_offset + frac * (b.cb_offset - a.cb_offset)
        mass[sel] = a.m_eff + frac * (b.m_eff - a.m_eff)
        eps[sel] = a.eps_r + frac * (b.eps_r - a.eps_r)
        dop[sel] = layer.doping * CM3_TO_NM3
    return WaferProfiles(grid=grid, offset=_nodes_from_mid(offset), mass_mid=mass,
                         eps_mid=eps, donors=_nodes_from_mid(dop), well=wafer.well_bounds())


def solve_schrodinger_1d(cb_edge, mass, grid, n_states):
    """Lowest eigenpairs of the BenDaniel-Duke effective-mass Hamiltonian.

    ``mass`` may be sampled on nodes or midpoints.  Envelopes vanish at both
    grid ends and are normalised so that ``sum(psi**2) * h == 1``.

    Returns
    -------
    energies : ndarray, shape (n_states,)
    psi : ndarray, shape (n_states, len(grid))
    """
    if n_states < 1:
        raise DomainError("n_states must be >= 1")
    V = np.asarray(cb_edge, dtype=float)
    if V.size != len(grid):
        raise DomainError("cb_edge and grid lengths differ")
    h = grid.spacing
    c = HBAR2_2ME / _as_mid(mass, grid, "mass") / h**2
    inner = V.size - 2
    n_states = min(n_states, inner)
    diag = c[:-1] + c[1:] + V[1:-1]
    off = -c[1:-1]
    E, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_states - 1))
    resid = (diag[:, None] * vec - E[None, :] * vec)
    resid[:-1] += off[:, None] * vec[1:]
    resid[1:] += off[:, None] * vec[:-1]
    scale = max(np.abs(diag).max(), 1.0)
    worst = float(np.abs(resid).max() / scale)
    if not np.isfinite(worst) or worst > 1e-8:
        raise NumericError("tridiagonal eigensolve did not converge", residual=worst)
    psi = np.zeros((n_states, V.size))
    psi[:, 1:-1] = vec.T / np.sqrt(h)
    # deterministic sign: largest lobe positive
    idx = np.argmax(np.abs(psi), axis=1)
    psi *= np.sign(psi[np.arange(n_states), idx])[:, None]
    return E, psi


def _poisson_operator(eps_mid, h, left_dirichlet, right_dirichlet):
    """Banded (1,1) finite-volume operator; Dirichlet rows become identity."""
    n = eps_mid.size + 1
    ab = np.zeros((3, n))
    cm = eps_mid / h
    diag = np.zeros(n)
    diag[:-1] -= cm
    diag[1:] -= cm
    ab[1] = diag
    ab[0, 1:] = cm  # super-diagonal
    ab[2, :-1] = cm  # sub-diagonal
    if left_dirichlet:
        ab[1, 0], ab[0, 1] = 1.0, 0.0
    if right_dirichlet:
        ab[1, -1], ab[2, -2] = 1.0, 0.0
    return ab


def _apply_banded(ab, x):
    y = ab[1] * x
    y[:-1] += ab[0, 1:] * x[1:]
    y[1:] += ab[2, :-1] * x[:-1]
    return y


def solve_poisson_1d(charge, eps_r, grid, left=0.0, right=None):
    """Electrostatic potential (V) for a net charge density ``charge`` (e nm^-3).

    ``left``/``right`` are Dirichlet potentials in volts, or ``None`` for a
    zero-field (charge-neutral) boundary.  ``eps_r`` is sampled on nodes or
    midpoints; ``charge`` holds cell averages on nodes.
    """
    if left is None and right is None:
        raise ConfigurationError("Poisson problem needs at least one Dirichlet boundary")
    h = grid.spacing
    rho = np.asarray(charge, dtype=float)
    if rho.size != len(grid):
        raise DomainError("charge and grid lengths differ")
    eps_mid = _as_mid(eps_r, grid, "eps_r")
    ab = _poisson_operator(eps_mid, h, left is not None, right is not None)
    rhs = -_Q_VNM * h * _cell_weights(rho.size) * rho
    if left is not None:
        rhs[0] = left
    if right is not None:
        rhs[-1] = right
    phi = solve_banded((1, 1), ab, rhs)
    res = _apply_banded(ab, phi) - rhs
    scale = max(np.abs(rhs).max(), np.abs(_apply_banded(np.abs(ab), np.abs(phi))).max(), 1e-300)
    if np.abs(res).max() / scale > 1e-10:
        raise NumericError("Poisson solve inaccurate", residual=float(np.abs(res).max() / scale))
    return phi


def surface_charge(phi, charge, eps_r, grid):
    """Sheet charge (e nm^-2) on the left Dirichlet boundary implied by ``phi``."""
    h = grid.spacing
    eps_mid = _as_mid(eps_r, grid, "eps_r")
    flux = eps_mid[0] * (phi[1] - phi[0]) / h
    return -(flux / _Q_VNM + 0.5 * h * charge[0])


def subband_dos(psi, mass, grid):
    """2D density of states m*/(pi hbar^2) per subband (nm^-2 meV^-1).

    The in-plane mass of each subband is the probability-weighted mass.
    """
    m_nodes = np.asarray(mass, dtype=float)
    if m_nodes.size == len(grid) - 1:
        m_nodes = _nodes_from_mid(m_nodes)
    m_sub = (psi**2 @ m_nodes) * grid.spacing
    return m_sub / (2.0 * np.pi * HBAR2_2ME)


def compute_density(energies, psi, E_F, T, mass, grid):
    """Electron volume density (nm^-3) from occupied subbands.

    n(x) = sum_i |psi_i(x)|^2 * D_i * kT * ln(1 + exp((E_F - E_i)/kT))
    """
    if not T > 0:
        raise DomainError("temperature must be positive")
    beta_inv = kT(T)
    dos = subband_dos(psi, mass, grid)
    occ = dos * beta_inv * np.logaddexp(0.0, (E_F - np.asarray(energies)) / beta_inv)
    return occ @ psi**2


@dataclass
class BandProfile:
    positions: np.ndarray  # nm
    cb_edge: np.ndarray  # meV, E_F = 0
    density: np.ndarray  # m^-3
    sheet_density: float  # m^-2
    energies: np.ndarray  # meV
    envelopes: np.ndarray  # nm^-1/2, shape (n_states, N)
    iterations: int = 0
    history: list = field(default_factory=list)
    donor_sheet: float = 0.0  # m^-2
    surface_sheet: float = 0.0  # m^-2, charge on the pinned surface (units of e)
    well: tuple = (0.0, 0.0)

    @property
    def sheet_density_cm2(self):
        return self.sheet_density * 1e-4

    def occupied(self, T, cutoff=10.0):
        """Indices of subbands below E_F + cutoff*kT."""
        return np.flatnonzero(self.energies < cutoff * kT(T))

    def weight_in(self, lo, hi):
        """Probability weight of each envelope inside [lo, hi] nm."""
        sel = (self.positions >= lo) & (self.positions <= hi)
        h = self.positions[1] - self.positions[0]
        return (self.envelopes[:, sel] ** 2).sum(axis=1) * h


def _corrector(U_old, prof, donors, E, psi, dos, beta_inv, U_left, max_newton=50):
    """Nonlinear Poisson step with subband energies shifted by the potential change."""
    grid = prof.grid
    h = grid.spacing
    n = U_old.size
    w = POISSON_COEFF * h * _cell_weights(n)
    ab0 = _poisson_operator(prof.eps_mid, h, True, False)
    psi2 = psi**2
    U = U_old.copy()

    def density(U):
        dU = U - U_old
        arg = (-E[:, None] - dU[None, :]) / beta_inv
        n_x = (dos[:, None] * beta_inv * np.logaddexp(0.0, arg) * psi2).sum(axis=0)
        dn = -(dos[:, None] * expit(arg) * psi2).sum(axis=0)
        return n_x, dn

    def residual(U):
        n_x, dn = density(U)
        F = _apply_banded(ab0, U) - w * (donors - n_x)
        F[0] = U[0] - U_left
        return F, dn

    F, dn = residual(U)
    norm = np.abs(F).max()
    for _ in range(max_newton):
        ab = ab0.copy()
        ab[1, 1:] += (w * dn)[1:]
        step = solve_banded((1, 1), ab, -F)
        lam = 1.0
        for _ in range(30):
            U_try = U + lam * step
            F_try, dn_try = residual(U_try)
            norm_try = np.abs(F_try).max()
            if norm_try < norm or norm_try < 1e-12:
                break
            lam *= 0.5
        U, F, dn, norm = U_try, F_try, dn_try, norm_try
        if np.abs(lam * step).max() < 1e-10 or norm < 1e-12:
            break
    return U


def _initial_potential(prof, donors, U_left, kind):
    grid = prof.grid
    n = len(grid)
    if kind == "flat":
        return np.full(n, U_left)
    if kind == "screened":
        h = grid.spacing
        lo, hi = prof.well
        in_well = (grid.positions >= lo) & (grid.positions <= hi)
        total = (donors * _cell_weights(n)).sum() * h
        electrons = np.where(in_well, total / max(in_well.sum() * h, h), 0.0)
        phi = solve_poisson_1d(donors - electrons, prof.eps_mid, grid, left=-U_left / 1e3)
        return -1e3 * phi
    raise DomainError(f"unknown initial guess {kind!r}")


def self_consistent_band(wafer, T=0.28, mixing=0.3, tol=1e-7, spacing=0.5, n_states=8,
                         max_iter=500, initial="flat"):
    """Converged band edge and electron density of ``wafer``.

    Parameters
    ----------
    wafer : WaferStack
    T : float
        Temperature in K.
    mixing : float
        Linear mixing fraction in (0, 1] applied to the corrected potential.
    tol : float
        Convergence threshold on the relative max-norm change of the
        electron density between successive iterations.
    initial : {"flat", "screened"}
        Starting potential: pinned flat band, or donors screened by a sheet
        of electrons spread uniformly over the well.
    """
    if not 0 < mixing <= 1:
        raise DomainError("mixing must lie in (0, 1]")
    prof = wafer_profiles(wafer, spacing)
    grid = prof.grid
    beta_inv = kT(T)
    donors = prof.donors
    U_left = wafer.surface_pinning - prof.offset[0]
    U = _initial_potential(prof, donors, U_left, initial)
    h = grid.spacing
    weights = _cell_weights(len(grid)) * h
    floor = 1e-9  # nm^-3, below any physically relevant density

    n_prev = None
    history = []
    for it in range(1, max_iter + 1):
        cb = prof.offset + U
        k = n_states
        while True:
            E, psi = solve_schrodinger_1d(cb, prof.mass_mid, grid, k)
            if E[-1] > 30.0 * beta_inv + 5.0 or k >= len(grid) - 2:
                break
            k *= 2
        dos = subband_dos(psi, prof.mass_mid, grid)
        n_x = (dos * beta_inv * np.logaddexp(0.0, -E / beta_inv)) @ psi**2
        U_pc = _corrector(U, prof, donors, E, psi, dos, beta_inv, U_left)
        # fixed-point residual of the potential guards against a stalled empty well
        dU = np.abs(U_pc - U).max() / max(np.abs(U).max(), 1.0)
        if n_prev is not None:
            # mixing damps successive changes; undo it to estimate the true error
            change = np.abs(n_x - n_prev).max() / max(np.abs(n_x).max(), floor) / mixing
            history.append(float(max(change, dU)))
            if change < tol and dU < tol:
                break
        n_prev = n_x
        U = U + mixing * (U_pc - U)
    else:
        raise ConvergenceError(f"no self-consistency after {max_iter} iterations", history)

    charge = donors - n_x
    phi = solve_poisson_1d(charge, prof.eps_mid, grid, left=-U_left / 1e3)
    cb = prof.offset - 1e3 * phi
    sigma_s = surface_charge(phi, charge, prof.eps_mid, grid)
    log.debug("band solve converged in %d iterations", it)
    return BandProfile(
        positions=grid.positions.copy(),
        cb_edge=cb,
        density=n_x * 1e27,
        sheet_density=float((n_x * weights).sum() * 1e18),
        energies=E,
        envelopes=psi,
        iterations=it,
        history=history,
        donor_sheet=float((donors * weights).sum() * 1e18),
        surface_sheet=float(sigma_s * 1e18),
        well=prof.well,
    )
