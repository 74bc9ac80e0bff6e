"""Discretised Weyl quantisation on a periodic one-dimensional grid.

The momentum grid is tied to hbar, ``xi_m = hbar * (pi / L) * m`` for
``m in [-n/2, n/2)``, which makes the oscillatory kernel exactly periodic on
the position grid. The kernel of op_hbar(a) then reduces to one FFT per
midpoint:

    K[j, k] = (1/n) sum_m exp(2 pi i m (j - k) / n) a(mid(j, k), xi_m)

where ``mid(j, k)`` is the periodic (minimum-image) midpoint of x_j and x_k.
All operators act on nodal values; inner products carry the weight dx.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from purestates.errors import (
    AliasingError,
    BoundarySpillError,
    DomainError,
    ResolutionError,
    ValidationError,
)

EDGE_FRACTION = 1.0 / 32.0
SPILL_TOL = 1e-6
FD_RELATIVE_STEP = 1e-4


@dataclass(frozen=True)
class Grid1D:
    n_points: int
    half_length: float

    def __post_init__(self) -> None:
        n = self.n_points
        if n < 256 or n & (n - 1):
            raise ValidationError(f"n_points must be a power of two >= 256, got {n}")
        if not self.half_length > 0:
            raise ValidationError("half_length must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return -self.half_length + self.dx * np.arange(self.n_points)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT order; momentum is hbar * k."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def xi_max(self, hbar: float) -> float:
        return np.pi * hbar * self.n_points / (2.0 * self.half_length)

    def momenta(self, hbar: float) -> np.ndarray:
        """xi_m = hbar (pi/L) m in FFT order."""
        m = np.fft.fftfreq(self.n_points) * self.n_points
        return hbar * (np.pi / self.half_length) * m

    def edge_mask(self) -> np.ndarray:
        band = max(1, int(self.n_points * EDGE_FRACTION))
        mask = np.zeros(self.n_points, dtype=bool)
        mask[:band] = True
        mask[-band:] = True
        return mask


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    grid: Grid1D
    values: np.ndarray
    hbar: float

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=complex).reshape(-1)
        if v.shape != (self.grid.n_points,):
            raise ValidationError("wavefunction length does not match grid")
        if not self.hbar > 0:
            raise DomainError("hbar must be positive")
        nrm = self.norm_of(v)
        if abs(nrm - 1.0) > 1e-10:
            raise ValidationError(f"wavefunction has discrete norm {nrm!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def norm_of(self, v: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(v) ** 2) * self.grid.dx))

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def inner(self, other: np.ndarray) -> complex:
        return complex(np.vdot(self.values, other) * self.grid.dx)

    def position_moments(self) -> tuple[float, float]:
        rho = self.density * self.grid.dx
        m = float(np.sum(rho * self.grid.x))
        return m, float(np.sqrt(np.sum(rho * (self.grid.x - m) ** 2)))

    def edge_mass(self) -> float:
        return float(np.sum(self.density[self.grid.edge_mask()]) * self.grid.dx)


def normalized(grid: Grid1D, values: np.ndarray, hbar: float) -> GridWavefunction:
    v = np.asarray(values, dtype=complex)
    nrm = np.sqrt(np.sum(np.abs(v) ** 2) * grid.dx)
    if nrm == 0:
        raise ValidationError("wavefunction vanishes on the grid")
    return GridWavefunction(grid, v / nrm, hbar)


# ---------------------------------------------------------------- envelopes


def gaussian_envelope(s: np.ndarray) -> np.ndarray:
    """pi^{-1/4} exp(-s^2/2), unit L2 norm."""
    return np.pi ** -0.25 * np.exp(-0.5 * np.asarray(s, dtype=float) ** 2)


def bump_profile(s: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere; smooth, peak 1 at 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)

    def f(u):
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = np.exp(-1.0 / u[pos])
        return out

    a, b = f(t), f(1.0 - t)
    return a / (a + b)


@dataclass(frozen=True)
class Bump1D:
    """Compactly supported smooth envelope centred at ``center`` with half-width ``width``."""

    center: float = 0.0
    width: float = 1.0

    def __call__(self, s: np.ndarray) -> np.ndarray:
        return bump_profile((np.asarray(s, dtype=float) - self.center) / self.width)

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.width, self.center + self.width


def wave_packet(
    envelope: Callable[[np.ndarray], np.ndarray],
    x0: float,
    xi0: float,
    hbar: float,
    grid: Grid1D,
) -> GridWavefunction:
    """hbar^{-1/4} envelope((x - x0)/sqrt(hbar)) exp(i x xi0 / hbar), renormalised."""
    if not hbar > 0:
        raise DomainError("hbar must be positive")
    x = grid.x
    vals = hbar ** -0.25 * np.asarray(envelope((x - x0) / np.sqrt(hbar)), dtype=complex)
    vals = vals * np.exp(1j * x * xi0 / hbar)
    psi = normalized(grid, vals, hbar)
    spill = psi.edge_mass()
    if spill > SPILL_TOL:
        raise BoundarySpillError(f"packet mass {spill:.2e} in the boundary band exceeds {SPILL_TOL:g}")
    return psi


# ---------------------------------------------------------------- symbols


@dataclass(frozen=True, eq=False)
class PhaseSpaceSymbol:
    """Symbol a(x, xi) with a declared support box ``((x_lo, x_hi), (xi_lo, xi_hi))``.

    ``free_axis`` marks a symbol that does not depend on "x" or "xi"; that
    side of the box is then infinite and exempt from the aliasing check.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    support_box: tuple
    bound: float | None = None
    free_axis: str | None = None

    def __post_init__(self) -> None:
        if self.free_axis not in (None, "x", "xi"):
            raise ValidationError(f"free_axis must be None, 'x' or 'xi', got {self.free_axis!r}")

    def __call__(self, x, xi) -> np.ndarray:
        return self.evaluator(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))

    @property
    def box_size(self) -> tuple[float, float]:
        (xl, xh), (pl, ph) = self.support_box
        return xh - xl, ph - pl

    def scaled(self, c: float) -> "PhaseSpaceSymbol":
        return PhaseSpaceSymbol(
            lambda x, xi: c * self.evaluator(x, xi),
            self.support_box,
            None if self.bound is None else abs(c) * self.bound,
            self.free_axis,
        )

    def __add__(self, other: "PhaseSpaceSymbol") -> "PhaseSpaceSymbol":
        (a1, a2), (a3, a4) = self.support_box
        (b1, b2), (b3, b4) = other.support_box
        bound = None if self.bound is None or other.bound is None else self.bound + other.bound
        return PhaseSpaceSymbol(
            lambda x, xi: self.evaluator(x, xi) + other.evaluator(x, xi),
            ((min(a1, b1), max(a2, b2)), (min(a3, b3), max(a4, b4))),
            bound,
            self.free_axis if self.free_axis == other.free_axis else None,
        )


def bump_symbol(
    center: Sequence[float] = (0.0, 0.0),
    radii: Sequence[float] = (1.0, 1.0),
    amplitude: float = 1.0,
) -> PhaseSpaceSymbol:
    """amplitude * exp(1 - 1/(1 - r^2)) with r the scaled distance to ``center``."""
    cx, cp = map(float, center)
    rx, rp = map(float, radii)

    def ev(x, xi):
        r = np.sqrt(((x - cx) / rx) ** 2 + ((xi - cp) / rp) ** 2)
        return amplitude * bump_profile(r)

    return PhaseSpaceSymbol(ev, ((cx - rx, cx + rx), (cp - rp, cp + rp)), abs(amplitude))


def plateau_cutoff(
    center: Sequence[float], inner: float, outer: float
) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Smooth radial cutoff: 1 within ``inner`` of center, 0 beyond ``outer``."""
    cx, cp = map(float, center)

    def chi(x, xi):
        r = np.sqrt((x - cx) ** 2 + (xi - cp) ** 2)
        return smooth_step((outer - r) / (outer - inner))

    return chi


def plateau_symbol(
    center: Sequence[float] = (0.0, 0.0), inner: float = 1.0, outer: float = 2.0, value: float = 1.0
) -> PhaseSpaceSymbol:
    chi = plateau_cutoff(center, inner, outer)
    cx, cp = map(float, center)
    return PhaseSpaceSymbol(
        lambda x, xi: value * chi(x, xi),
        ((cx - outer, cx + outer), (cp - outer, cp + outer)),
        abs(value),
    )


def affine_symbol(
    coefficients: Sequence[float],
    center: Sequence[float] = (0.0, 0.0),
    inner: float = 1.0,
    outer: float = 2.0,
) -> PhaseSpaceSymbol:
    """(c0 + cx x + cxi xi) times a smooth plateau cutoff around ``center``."""
    c0, c1, c2 = map(float, coefficients)
    chi = plateau_cutoff(center, inner, outer)
    cx, cp = map(float, center)
    bound = abs(c0) + (abs(c1) + abs(c2)) * (max(abs(cx), abs(cp)) + outer)
    return PhaseSpaceSymbol(
        lambda x, xi: (c0 + c1 * x + c2 * xi) * chi(x, xi),
        ((cx - outer, cx + outer), (cp - outer, cp + outer)),
        bound,
    )


def position_symbol(f: Callable[[np.ndarray], np.ndarray], x_support: Sequence[float], bound: float | None = None) -> PhaseSpaceSymbol:
    """a(x, xi) = f(x): quantises to multiplication by f on the grid."""
    xl, xh = map(float, x_support)
    return PhaseSpaceSymbol(
        lambda x, xi: np.asarray(f(x), dtype=float) * np.ones_like(xi),
        ((xl, xh), (-np.inf, np.inf)),
        bound,
        "xi",
    )


def momentum_symbol(g: Callable[[np.ndarray], np.ndarray], xi_support: Sequence[float], bound: float | None = None) -> PhaseSpaceSymbol:
    """a(x, xi) = g(xi): quantises to a Fourier multiplier on the periodic grid."""
    pl, ph = map(float, xi_support)
    return PhaseSpaceSymbol(
        lambda x, xi: np.asarray(g(xi), dtype=float) * np.ones_like(x),
        ((-np.inf, np.inf), (pl, ph)),
        bound,
        "x",
    )


# ---------------------------------------------------------------- quantisation


def check_support(a: PhaseSpaceSymbol, hbar: float, grid: Grid1D) -> None:
    (xl, xh), (pl, ph) = a.support_box
    L, P = grid.half_length, grid.xi_max(hbar)
    if a.free_axis != "x" and not (-L < xl and xh < L):
        raise AliasingError(f"symbol x-support [{xl}, {xh}] leaves the grid (-{L}, {L})")
    if a.free_axis != "xi" and not (-P < pl and ph < P):
        raise AliasingError(
            f"symbol xi-support [{pl}, {ph}] exceeds momentum range (-{P:.4g}, {P:.4g})"
        )


def weyl_quantize(a: PhaseSpaceSymbol, hbar: float, grid: Grid1D) -> np.ndarray:
    """Matrix of op_hbar(a) acting on nodal values."""
    if not hbar > 0:
        raise DomainError("hbar must be positive")
    check_support(a, hbar, grid)
    n, L, dx = grid.n_points, grid.half_length, grid.dx
    mids = -L + 0.5 * dx * np.arange(2 * n)
    xi = grid.momenta(hbar)
    A = np.asarray(a(mids[:, None], xi[None, :]))
    F = np.fft.ifft(A, axis=1)
    j = np.arange(n)
    J, Kc = np.meshgrid(j, j, indexing="ij")
    diff = J - Kc
    wrap = np.abs(diff) > n // 2
    s = (J + Kc + n * wrap) % (2 * n)
    K = F[s, diff % n]
    if np.isrealobj(A) or np.max(np.abs(np.imag(A))) == 0.0:
        # exact Hermitian symmetrisation for real symbols
        K = 0.5 * (K + K.conj().T)
    return K


def expectation_matrix(psi: GridWavefunction, K: np.ndarray) -> complex:
    return complex(np.vdot(psi.values, K @ psi.values) * psi.grid.dx)


def expectation_symbol(psi: GridWavefunction, a: PhaseSpaceSymbol, hbar: float | None = None) -> float:
    """Re <psi, op_hbar(a) psi>; an imaginary part above 1e-8 is an error for real symbols."""
    hbar = psi.hbar if hbar is None else hbar
    if not np.isclose(hbar, psi.hbar):
        raise ValidationError("symbol hbar differs from the wavefunction's hbar")
    val = expectation_matrix(psi, weyl_quantize(a, hbar, psi.grid))
    if abs(val.imag) > 1e-8:
        raise ValidationError(f"expectation has imaginary part {val.imag:.2e}")
    return val.real


@dataclass(frozen=True)
class LimitRow:
    hbar: float
    expectation: float
    target: float
    error: float


def semiclassical_limit_table(
    envelope: Callable[[np.ndarray], np.ndarray],
    x0: float,
    xi0: float,
    a: PhaseSpaceSymbol,
    hbar_list: Sequence[float],
    grid: Grid1D,
) -> list[LimitRow]:
    hs = [float(h) for h in hbar_list]
    if any(h2 >= h1 for h1, h2 in zip(hs, hs[1:])):
        raise ValidationError("hbar_list must be strictly decreasing")
    target = float(np.real(a(np.array(x0), np.array(xi0))))
    rows = []
    for h in hs:
        if np.sqrt(h) < 4 * grid.dx:
            raise ResolutionError(f"packet width sqrt(hbar) = {np.sqrt(h):.3g} below 4 dx = {4 * grid.dx:.3g}")
        psi = wave_packet(envelope, x0, xi0, h, grid)
        val = expectation_symbol(psi, a, h)
        rows.append(LimitRow(h, val, target, abs(val - target)))
    return rows


# ---------------------------------------------------------------- Moyal product


def _derivatives(a: PhaseSpaceSymbol, x, xi, hx: float, hp: float) -> dict:
    f = a.evaluator
    c = f(x, xi)
    xp, xm = f(x + hx, xi), f(x - hx, xi)
    pp, pm = f(x, xi + hp), f(x, xi - hp)
    mixed = (f(x + hx, xi + hp) - f(x + hx, xi - hp) - f(x - hx, xi + hp) + f(x - hx, xi - hp)) / (4 * hx * hp)
    return {
        "f": c,
        "x": (xp - xm) / (2 * hx),
        "p": (pp - pm) / (2 * hp),
        "xx": (xp - 2 * c + xm) / hx**2,
        "pp": (pp - 2 * c + pm) / hp**2,
        "xp": mixed,
    }


def moyal_product_truncated(a: PhaseSpaceSymbol, b: PhaseSpaceSymbol, hbar: float, order: int = 2) -> PhaseSpaceSymbol:
    """Partial sum of the Moyal series a *_hbar b up to ``order`` (0, 1 or 2).

    order 1 adds (i hbar/2)(a_x b_xi - a_xi b_x); order 2 adds
    -(hbar^2/8)(a_xixi b_xx - 2 a_xxi b_xxi + a_xx b_xixi). The sign of the
    first-order term is the one for which op(a) op(b) = op(a * b) holds with
    the quantisation above (op(x) op(xi) = op(x xi) + i hbar / 2).
    Derivatives are centred finite differences with step 1e-4 of each
    symbol's box size.
    """
    if order not in (0, 1, 2):
        raise DomainError(f"Moyal truncation order {order} unsupported (0, 1 or 2)")
    # an unbounded (free) axis falls back to unit scale
    ahx, ahp = (FD_RELATIVE_STEP * (s if np.isfinite(s) else 1.0) for s in a.box_size)
    bhx, bhp = (FD_RELATIVE_STEP * (s if np.isfinite(s) else 1.0) for s in b.box_size)

    def ev(x, xi):
        if order == 0:
            return a.evaluator(x, xi) * b.evaluator(x, xi)
        da = _derivatives(a, x, xi, ahx, ahp)
        db = _derivatives(b, x, xi, bhx, bhp)
        out = da["f"] * db["f"] + 0.5j * hbar * (da["x"] * db["p"] - da["p"] * db["x"])
        if order == 2:
            out = out - (hbar**2 / 8.0) * (
                da["pp"] * db["xx"] - 2.0 * da["xp"] * db["xp"] + da["xx"] * db["pp"]
            )
        return out

    (a1, a2), (a3, a4) = a.support_box
    (b1, b2), (b3, b4) = b.support_box
    box = ((max(a1, b1), min(a2, b2)), (max(a3, b3), min(a4, b4)))
    return PhaseSpaceSymbol(ev, box, None)


# ---------------------------------------------------------------- Husimi


def husimi(
    psi: GridWavefunction,
    x_nodes: Sequence[float],
    xi_nodes: Sequence[float],
    window: float = 8.0,
) -> np.ndarray:
    """Husimi density |<g_{x,xi}, psi>|^2 / (2 pi hbar) on a phase-space grid.

    ``g`` is the coherent state of width sqrt(hbar). Result has shape
    ``(len(x_nodes), len(xi_nodes))``; overlaps are truncated to
    ``window * sqrt(hbar)`` around each x-node.
    """
    xs = np.asarray(x_nodes, dtype=float)
    ps = np.asarray(xi_nodes, dtype=float)
    hbar = psi.hbar
    width = np.sqrt(hbar)
    for nodes, name in ((xs, "x"), (ps, "xi")):
        if nodes.size > 1 and np.max(np.diff(nodes)) > width:
            raise ResolutionError(f"{name}-cells larger than sqrt(hbar) = {width:.3g}")
    x = psi.grid.x
    dx = psi.grid.dx
    v = psi.values
    pref = (np.pi * hbar) ** -0.25 * dx
    out = np.empty((xs.size, ps.size))
    reach = window * width
    for i, xb in enumerate(xs):
        lo = np.searchsorted(x, xb - reach)
        hi = np.searchsorted(x, xb + reach)
        xw = x[lo:hi]
        w = np.exp(-((xw - xb) ** 2) / (2 * hbar)) * v[lo:hi]
        # phase relative to xb keeps the exponent small
        ph = np.exp(-1j * np.outer(ps, xw - xb) / hbar)
        out[i] = np.abs(pref * (ph @ w)) ** 2
    return out / (2 * np.pi * hbar)


def cell_area(x_nodes: Sequence[float], xi_nodes: Sequence[float]) -> float:
    xs, ps = np.asarray(x_nodes), np.asarray(xi_nodes)
    return float((xs[1] - xs[0]) * (ps[1] - ps[0]))


def husimi_average(H: np.ndarray, x_nodes, xi_nodes, a: PhaseSpaceSymbol) -> float:
    X, P = np.meshgrid(np.asarray(x_nodes), np.asarray(xi_nodes), indexing="ij")
    return float(np.real(np.sum(a(X, P) * H)) * cell_area(x_nodes, xi_nodes))


def husimi_peak(H: np.ndarray, x_nodes, xi_nodes) -> tuple[float, float]:
    i, j = np.unravel_index(np.argmax(H), H.shape)
    return float(np.asarray(x_nodes)[i]), float(np.asarray(xi_nodes)[j])


def disc_mass(
    psi: GridWavefunction,
    center: Sequence[float],
    radius: float,
    cell: float | None = None,
) -> float:
    """Husimi mass inside the phase-space disc of ``radius`` about ``center``."""
    hbar = psi.hbar
    width = np.sqrt(hbar)
    cx, cp = map(float, center)
    L, P = psi.grid.half_length, psi.grid.xi_max(hbar)
    if cx - radius <= -L or cx + radius >= L or cp - radius <= -P or cp + radius >= P:
        raise ValidationError("disc extends outside the phase-space grid")
    cell = min(width / 5.0, radius / 10.0) if cell is None else cell
    m = int(np.ceil(radius / cell))
    offs = (np.arange(-m, m) + 0.5) * (radius / m)
    H = husimi(psi, cx + offs, cp + offs)
    R2 = offs[:, None] ** 2 + offs[None, :] ** 2
    return float(np.sum(H[R2 <= radius**2]) * (radius / m) ** 2)
