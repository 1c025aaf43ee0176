"""Peak finding and lineshape fits for sampled spectra."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import EmptySpectrum, FitDiverged, ParameterError

MIN_FIT_POINTS = 8


def find_peaks(omega, values, min_height: float = 0.1, min_prominence: float = 0.05):
    """Local maxima of ``values`` as ``[(omega, value, prominence), ...]``.

    Non-finite samples are dropped first. Prominence is measured against the
    lower of the two flanking minima, each taken between the peak and the
    neighbouring local maximum (or the end of the data).
    """
    omega = np.asarray(omega, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = np.isfinite(values) & np.isfinite(omega)
    omega, values = omega[keep], values[keep]
    if omega.size == 0:
        raise EmptySpectrum("no finite samples")
    if np.any(np.diff(omega) < 0):
        raise ParameterError("spectrum must be sorted by omega")
    n = values.size
    if n < 3:
        return []

    maxima = []
    i = 1
    while i < n - 1:
        if values[i] > values[i - 1]:
            j = i
            while j < n - 1 and values[j + 1] == values[i]:
                j += 1
            if j < n - 1 and values[j + 1] < values[i]:
                maxima.append((i + j) // 2)
            i = j + 1
        else:
            i += 1

    peaks = []
    for k, m in enumerate(maxima):
        left = maxima[k - 1] if k > 0 else 0
        right = maxima[k + 1] if k + 1 < len(maxima) else n - 1
        flank = min(values[left:m + 1].min(), values[m:right + 1].min())
        prom = values[m] - flank
        if values[m] >= min_height and prom >= min_prominence:
            peaks.append((float(omega[m]), float(values[m]), float(prom)))
    return peaks


def find_crossings(omega, a, b):
    """Frequencies where ``a - b`` changes sign (linear interpolation)."""
    omega = np.asarray(omega, dtype=float)
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    keep = np.isfinite(diff)
    omega, diff = omega[keep], diff[keep]
    out = []
    for i in range(len(diff) - 1):
        d0, d1 = diff[i], diff[i + 1]
        if d0 == 0:
            out.append(float(omega[i]))
        elif d0 * d1 < 0:
            out.append(float(omega[i] + (omega[i + 1] - omega[i]) * d0 / (d0 - d1)))
    return out


# --- lineshapes ---------------------------------------------------------------

def fano(omega, q, omega0, width, amplitude, baseline):
    """A (q + eps)^2 / (1 + eps^2) + B, eps = (omega - omega0) / (width / 2)."""
    eps = (np.asarray(omega) - omega0) / (0.5 * width)
    return amplitude * (q + eps) ** 2 / (1.0 + eps ** 2) + baseline


def lorentzian(omega, center, width, amplitude, baseline):
    """Peak of full width ``width`` and height ``amplitude`` above ``baseline``."""
    eps = (np.asarray(omega) - center) / (0.5 * width)
    return amplitude / (1.0 + eps ** 2) + baseline


@dataclass
class FanoFit:
    q: float
    omega0: float
    width: float
    amplitude: float
    baseline: float
    residual: float       # RMS of the fit residuals

    def __call__(self, omega):
        return fano(omega, self.q, self.omega0, self.width, self.amplitude, self.baseline)


@dataclass
class LorentzianFit:
    center: float
    width: float
    amplitude: float
    baseline: float
    residual: float

    def __call__(self, omega):
        return lorentzian(omega, self.center, self.width, self.amplitude, self.baseline)


def _window(omega, y):
    omega = np.asarray(omega, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(omega) & np.isfinite(y)
    omega, y = omega[keep], y[keep]
    if omega.size < MIN_FIT_POINTS:
        raise ParameterError(f"fit window needs >= {MIN_FIT_POINTS} finite points")
    return omega, y


def _half_width_guess(omega, y, i_ext):
    """Half-maximum distance from the extremum, clipped to the window."""
    span = omega[-1] - omega[0]
    base = np.median(y)
    half = base + 0.5 * (y[i_ext] - base)
    above = (y - half) * np.sign(y[i_ext] - base) > 0
    j0 = j1 = i_ext
    while j0 > 0 and above[j0 - 1]:
        j0 -= 1
    while j1 < len(y) - 1 and above[j1 + 1]:
        j1 += 1
    return float(np.clip(omega[j1] - omega[j0], 2 * span / len(y), span))


def _best(fits, threshold, what):
    fits = [f for f in fits if f is not None]
    if not fits:
        raise FitDiverged(f"{what}: no start converged")
    best = min(fits, key=lambda f: f.residual)
    if best.residual > threshold:
        raise FitDiverged(f"{what}: residual {best.residual:.3g} above {threshold:.3g}")
    return best


SCREEN_NFEV = 200      # budget per start while screening
POLISH_NFEV = 6000     # budget for the few best starts
N_POLISH = 3


def _multistart(model, omega, y, starts, lower, upper, x_scale):
    """Screen every start briefly, then polish the best few.

    Returns ``[(params, rms), ...]`` for the polished fits.
    """
    yr = float(np.ptp(y)) or 1.0

    def run(x0, nfev):
        try:
            res = least_squares(lambda p: (model(omega, *p) - y) / yr, x0,
                                bounds=(lower, upper), x_scale=x_scale,
                                xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=nfev)
        except ValueError:
            return None
        return res.x, float(np.sqrt(np.mean((model(omega, *res.x) - y) ** 2)))

    screened = [r for r in (run(x0, SCREEN_NFEV) for x0 in starts) if r is not None]
    screened.sort(key=lambda r: r[1])
    polished = [run(x, POLISH_NFEV) for x, _ in screened[:N_POLISH]]
    return [r for r in polished if r is not None]


def fit_lorentzian(omega, y, max_rel_residual: float = 0.1) -> LorentzianFit:
    """Least-squares Lorentzian fit with deterministic multi-start.

    Starts are centred at the window's extremum and at its midpoint.
    ``FitDiverged`` if the best RMS residual exceeds ``max_rel_residual``
    times the data range.
    """
    omega, y = _window(omega, y)
    base = float(np.median(y))
    i_ext = int(np.argmax(np.abs(y - base)))
    w0 = _half_width_guess(omega, y, i_ext)
    span = omega[-1] - omega[0]
    yr = float(np.ptp(y)) or 1.0
    starts = [[c0, w0 * wscale, y[i_ext] - base, base]
              for c0 in (omega[i_ext], 0.5 * (omega[0] + omega[-1]))
              for wscale in (1.0, 0.3, 3.0)]
    results = _multistart(lorentzian, omega, y, starts,
                          [omega[0] - span, 1e-12 * span, -np.inf, -np.inf],
                          [omega[-1] + span, 10 * span, np.inf, np.inf],
                          [span, w0, yr, yr])
    fits = [LorentzianFit(*map(float, x), rms) for x, rms in results]
    return _best(fits, max_rel_residual * yr, "Lorentzian fit")


def fit_fano(omega, y, max_rel_residual: float = 0.1) -> FanoFit:
    """Least-squares Fano fit with deterministic multi-start.

    Starts combine centres at the window's extremum and midpoint with a
    small set of asymmetry values.
    """
    omega, y = _window(omega, y)
    base = float(np.median(y))
    i_max, i_min = int(np.argmax(y)), int(np.argmin(y))
    i_ext = int(np.argmax(np.abs(y - base)))
    w0 = _half_width_guess(omega, y, i_ext)
    span = omega[-1] - omega[0]
    yr = float(np.ptp(y)) or 1.0
    centres = (0.5 * (omega[i_max] + omega[i_min]), omega[i_ext], 0.5 * (omega[0] + omega[-1]))
    starts = [[q0, c0, w0, yr / (1.0 + q0 * q0), float(y.min())]
              for c0 in centres for q0 in (-3.0, -1.0, -0.3, 0.3, 1.0, 3.0, 10.0)]
    results = _multistart(fano, omega, y, starts,
                          [-1e6, omega[0] - span, 1e-12 * span, 0.0, -np.inf],
                          [1e6, omega[-1] + span, 10 * span, np.inf, np.inf],
                          [1.0, span, w0, yr, yr])
    fits = [FanoFit(*map(float, x), rms) for x, rms in results]
    return _best(fits, max_rel_residual * yr, "Fano fit")


def peak_window(omega, y, n_fwhm: float = 1.5):
    """Interval of ``n_fwhm`` full widths either side of the global maximum.

    The width is read off the half-maximum crossings of the sampled curve.
    """
    omega, y = _window(omega, y)
    i = int(np.argmax(y))
    base = float(np.min(y))
    half = base + 0.5 * (y[i] - base)
    j0 = i
    while j0 > 0 and y[j0 - 1] > half:
        j0 -= 1
    j1 = i
    while j1 < len(y) - 1 and y[j1 + 1] > half:
        j1 += 1
    fwhm = max(omega[j1] - omega[j0], omega[1] - omega[0])
    return (float(omega[i] - n_fwhm * fwhm), float(omega[i] + n_fwhm * fwhm))
