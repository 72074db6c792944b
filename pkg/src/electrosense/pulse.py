"""Causal band-pass pulse and its dyadic dilations.

The base waveform is a third derivative of a Gaussian under a flat-top
C-infinity window supported in (0, T):

    h(t) = d/dt [ g''(t) w(t) ] = g'''(t) w(t) + g''(t) w'(t)

Writing h as an exact derivative of a compactly supported function makes
int h dt = 0 to machine precision, so the pulse is band-pass by
construction.  The window is identically 1 wherever the Gaussian mass
lives, which keeps the first and second moments of h at round-off level.

Scale j compresses time by 2^j and rescales by 2^{j/2}; on the canonical
grids (N samples on [0, 2^{-j} T]) the samples of h_j are exactly
2^{j/2} times the base samples, so the L^2 energy is scale-invariant.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

DEFAULT_T = 5.0
DEFAULT_N = 512
DEFAULT_SCALES = (-1, 0, 1, 2)


def _bump(u):
    """f(u) = exp(-1/u) for u > 0, extended by 0; C-infinity at 0."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def _bump_prime(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos]) / u[pos] ** 2
    return out


def _smoothstep(u):
    fa, fb = _bump(u), _bump(1.0 - np.asarray(u, float))
    return fa / (fa + fb)


def _smoothstep_prime(u):
    u = np.asarray(u, dtype=float)
    fa, fb = _bump(u), _bump(1.0 - u)
    num = _bump_prime(u) * fb + fa * _bump_prime(1.0 - u)
    return num / (fa + fb) ** 2


@dataclass(frozen=True)
class Pulse:
    """Sampled pulse h_j on its canonical grid of N points over [0, 2^{-j} T]."""

    j: int
    T: float
    N: int
    samples: np.ndarray
    params: tuple  # (t0, width, window ramp) of the base waveform
    fingerprint: str

    @property
    def window_length(self) -> float:
        return self.T * 2.0 ** (-self.j)

    @property
    def dt(self) -> float:
        return self.window_length / self.N

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.N) * self.dt

    @property
    def omega_grid(self) -> np.ndarray:
        """Full DFT angular-frequency grid 2 pi k / (2^{-j} T), k = 0..N-1."""
        return 2.0 * np.pi * np.arange(self.N) / self.window_length

    @property
    def spectrum(self) -> np.ndarray:
        """DFT approximation of h_j^(omega) on the full grid."""
        return self.dt * np.fft.fft(self.samples)

    def spectrum_rfft(self) -> np.ndarray:
        return self.dt * np.fft.rfft(self.samples)

    def spectrum_at(self, omega) -> np.ndarray:
        """Transform int h e^{-i omega t} dt at arbitrary (complex) omega.

        Trapezoid sum over the sample grid; spectrally accurate because the
        periodic extension of h_j is C-infinity.
        """
        omega = np.atleast_1d(np.asarray(omega, dtype=complex))
        phase = np.exp(-1j * omega[:, None] * self.times[None, :])
        return self.dt * (phase @ self.samples)

    def energy(self) -> float:
        """Discrete L^2 norm squared, sum h^2 dt."""
        return float(np.sum(self.samples**2) * self.dt)


def _waveform(t, T, t0, width, ramp):
    t = np.asarray(t, dtype=float)
    z = (t - t0) / width
    gauss = np.exp(-0.5 * z**2)
    g2 = (z**2 - 1.0) / width**2 * gauss
    g3 = -(z**3 - 3.0 * z) / width**3 * gauss
    w = _smoothstep(t / ramp) * _smoothstep((T - t) / ramp)
    wp = (_smoothstep_prime(t / ramp) * _smoothstep((T - t) / ramp)
          - _smoothstep(t / ramp) * _smoothstep_prime((T - t) / ramp)) / ramp
    return g3 * w + g2 * wp


def base_pulse(T: float = DEFAULT_T, N: int = DEFAULT_N,
               t0: float | None = None, width: float | None = None,
               ramp: float | None = None) -> Pulse:
    """Unit-energy causal band-pass pulse at scale 0.

    Defaults place the Gaussian at t0 = 3T/8 with width T/30 under a window
    that is flat on [T/8, 7T/8]; the waveform is then ~1e-14 outside the flat
    region, which keeps band-pass and moment residuals at round-off level.
    """
    if T <= 0:
        raise ValueError("pulse duration must be positive")
    if N < 64:
        raise ValueError("need at least 64 samples")
    t0 = 3.0 * T / 8.0 if t0 is None else t0
    width = T / 30.0 if width is None else width
    ramp = T / 8.0 if ramp is None else ramp
    t = np.arange(N) * (T / N)
    samples = _waveform(t, T, t0, width, ramp)
    samples = samples / np.sqrt(np.sum(samples**2) * T / N)
    fp = hashlib.sha256()
    fp.update(np.asarray([T, N, t0, width, ramp], dtype=float).tobytes())
    fp.update(samples.tobytes())
    return Pulse(0, float(T), int(N), samples, (t0, width, ramp),
                 fp.hexdigest()[:16])


def dilate(pulse: Pulse, j: int) -> Pulse:
    """Dyadic dilation h_j(t) = 2^{j/2} h(2^j t) sampled on [0, 2^{-j} T].

    The canonical grids dilate with the pulse, so the sample vector is just
    rescaled by 2^{j/2}.
    """
    if pulse.j != 0:
        raise ValueError("dilate expects the base (scale 0) pulse")
    samples = 2.0 ** (j / 2.0) * pulse.samples
    return Pulse(int(j), pulse.T, pulse.N, samples, pulse.params,
                 pulse.fingerprint)


def pulse_bank(base: Pulse, scales=DEFAULT_SCALES) -> dict[int, Pulse]:
    """Dilations of a base pulse for each requested scale."""
    return {int(j): dilate(base, int(j)) for j in scales}
