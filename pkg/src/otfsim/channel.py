"""Linear time-varying channel simulation and its delay-Doppler image.

A channel is a set of taps ``h(kappa, ell)`` over absolute sample index
kappa and delay ell. Two parameterizations are provided:

* :class:`LtvChannel`: discrete taps with complex gain, normalized Doppler
  (cycles per sample) and phase; gains vary continuously with kappa.
* :class:`BlockFadingChannel`: per-OFDM-symbol constant tap gains, the
  regime in which the per-symbol channel matrices are circulant and the
  end-to-end response is an exact 2-D circular convolution.

From either, the per-symbol matrices ``H_n``, the Doppler taps across
symbols, and the windowed delay-Doppler response are constructed exactly.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .grids import ModemConfig, SeparableWindow
from .modem_reference import cp_matrices


@dataclass(frozen=True)
class ChannelTap:
    delay: int
    gain: complex
    doppler: float = 0.0  # cycles per sample
    phase: float = 0.0  # radians

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("tap delay must be a non-negative sample count")


@dataclass(frozen=True, eq=False)
class LtvChannel:
    """Tapped-delay-line channel with per-tap Doppler shift and phase.

    ``h(kappa, ell) = sum over taps p with delay ell of
    gain_p * exp(j * (2*pi*doppler_p*kappa + phase_p))``.
    """

    taps: tuple[ChannelTap, ...]

    def __post_init__(self):
        taps = tuple(self.taps)
        if not taps:
            raise ValueError("channel needs at least one tap")
        object.__setattr__(self, "taps", taps)

    @property
    def length(self) -> int:
        """Channel length L = 1 + max delay."""
        return 1 + max(tap.delay for tap in self.taps)

    def coeffs(self, kappa: np.ndarray) -> np.ndarray:
        """Tap gains h(kappa, ell) at absolute sample indices; shape (len(kappa), L)."""
        kappa = np.asarray(kappa, dtype=np.float64)
        h = np.zeros((kappa.size, self.length), dtype=np.complex128)
        for tap in self.taps:
            h[:, tap.delay] += tap.gain * np.exp(
                1j * (2 * np.pi * tap.doppler * kappa + tap.phase)
            )
        return h


@dataclass(frozen=True, eq=False)
class BlockFadingChannel:
    """Channel constant within each OFDM symbol, varying across symbols.

    `gains` has shape (N, L): row n is the length-L impulse response active
    during symbol n (CP included). `sym_len` is the symbol length in samples.
    """

    gains: np.ndarray
    sym_len: int

    def __post_init__(self):
        gains = np.atleast_2d(np.asarray(self.gains, dtype=np.complex128))
        if gains.size == 0:
            raise ValueError("channel needs at least one tap")
        if self.sym_len < 1:
            raise ValueError("sym_len must be positive")
        object.__setattr__(self, "gains", gains)

    @property
    def length(self) -> int:
        return self.gains.shape[1]

    def coeffs(self, kappa: np.ndarray) -> np.ndarray:
        kappa = np.asarray(kappa)
        idx = np.clip(kappa.astype(np.int64) // self.sym_len, 0, self.gains.shape[0] - 1)
        return self.gains[idx]


def apply_channel(signal: np.ndarray, ch) -> np.ndarray:
    """Run a frame through the time-varying convolution (noise-free).

    ``r(kappa) = sum_ell h(kappa, ell) * s(kappa - ell)`` with zero initial
    state (``s(kappa) = 0`` for kappa < 0).
    """
    signal = np.asarray(signal, dtype=np.complex128)
    h = ch.coeffs(np.arange(signal.size))
    out = np.zeros_like(signal)
    for ell in range(min(h.shape[1], signal.size)):
        if ell == 0:
            out += h[:, 0] * signal
        else:
            out[ell:] += h[ell:, ell] * signal[: signal.size - ell]
    return out


def add_awgn(signal: np.ndarray, noise_var: float, seed) -> np.ndarray:
    """Add circularly-symmetric complex Gaussian noise of the given variance.

    `seed` may be an int, a SeedSequence, or a Generator; the output is
    deterministic for a fixed seed.
    """
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    signal = np.asarray(signal, dtype=np.complex128)
    if noise_var == 0:
        return signal.copy()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    scale = np.sqrt(noise_var / 2)
    noise = rng.normal(scale=scale, size=signal.shape) + 1j * rng.normal(
        scale=scale, size=signal.shape
    )
    return signal + noise


def build_Hn(ch, n: int, cfg: ModemConfig) -> np.ndarray:
    """Per-symbol channel matrix ``H_n = R_cp @ H_breve_n @ A_cp`` (M x M).

    ``H_breve_n`` is the banded time-varying convolution matrix over symbol
    n's absolute sample indices with zero state at the symbol start; energy
    leaking in from the previous symbol is not modeled (it only touches
    samples the CP removal discards when ``L <= cp_len + 1``).
    """
    if not 0 <= n < cfg.N:
        raise ValueError(f"symbol index {n} out of range [0, {cfg.N})")
    length = ch.length
    if length > cfg.cp_len + 1:
        warnings.warn(
            f"channel length {length} exceeds cp_len + 1 = {cfg.cp_len + 1}; "
            "symbols are no longer ISI-free and inter-symbol leakage is ignored",
            stacklevel=2,
        )
    sym_len = cfg.sym_len
    kappa = n * sym_len + np.arange(sym_len)
    h = ch.coeffs(kappa)
    breve = np.zeros((sym_len, sym_len), dtype=np.complex128)
    for ell in range(min(length, sym_len)):
        rows = np.arange(ell, sym_len)
        breve[rows, rows - ell] = h[rows, ell]
    # R_cp @ breve @ A_cp without the matmuls: CP removal keeps the last M
    # rows; CP addition folds the first cp_len input columns onto the tail
    out = breve[cfg.cp_len :, cfg.cp_len :].copy()
    if cfg.cp_len:
        out[:, cfg.M - cfg.cp_len :] += breve[cfg.cp_len :, : cfg.cp_len]
    return out


def build_doppler_taps(ch, wr: np.ndarray, cfg: ModemConfig) -> list[np.ndarray]:
    """Doppler-domain channel taps: the DFT across symbols of the windowed H_n.

    ``taps[k] = (1/N) * sum_i H_i * wr[i] * exp(-j*2*pi*k*i/N)``.
    """
    wr = np.asarray(wr, dtype=np.complex128)
    if wr.shape != (cfg.N,):
        raise ValueError(f"time window must have length {cfg.N}")
    h_stack = np.stack([build_Hn(ch, i, cfg) for i in range(cfg.N)])
    phases = np.exp(-2j * np.pi * np.outer(np.arange(cfg.N), np.arange(cfg.N)) / cfg.N)
    weights = phases * wr[None, :] / cfg.N
    taps = np.einsum("ki,imn->kmn", weights, h_stack)
    return [taps[k] for k in range(cfg.N)]


def build_dd_response(doppler_taps: list[np.ndarray], window: SeparableWindow) -> np.ndarray:
    """Windowed delay-Doppler channel impulse response (M x N).

    Column l is the first column of ``Wbar_c @ taps[l]``; with a rectangular
    frequency window that is just the first column of the l-th Doppler tap.
    """
    m = doppler_taps[0].shape[0]
    n = len(doppler_taps)
    out = np.empty((m, n), dtype=np.complex128)
    wbar = None if window.is_rect_freq else window.wbar_c()
    for l, tap in enumerate(doppler_taps):
        col = tap[:, 0] if wbar is None else (wbar @ tap)[:, 0]
        out[:, l] = col
    return out


def doppler_cycles_per_sample(
    speed_mps: float, carrier_hz: float, sample_rate_hz: float, light_speed: float = 299792458.0
) -> float:
    """Convert a physical mobile speed to normalized Doppler (cycles/sample)."""
    return (speed_mps / light_speed) * carrier_hz / sample_rate_hz


def identity_channel() -> LtvChannel:
    return LtvChannel((ChannelTap(delay=0, gain=1.0),))


def random_ltv_channel(
    rng: np.random.Generator,
    n_taps: int,
    max_delay: int,
    max_doppler: float,
) -> LtvChannel:
    """Random unit-power LTV channel with distinct delays in [0, max_delay]."""
    delays = rng.choice(max_delay + 1, size=min(n_taps, max_delay + 1), replace=False)
    if 0 not in delays:
        delays[0] = 0  # keep a line-of-sight tap so the gain normalization is meaningful
    gains = rng.normal(size=delays.size) + 1j * rng.normal(size=delays.size)
    gains /= np.linalg.norm(gains)
    taps = tuple(
        ChannelTap(
            delay=int(d),
            gain=complex(g),
            doppler=float(rng.uniform(-max_doppler, max_doppler)),
            phase=float(rng.uniform(0, 2 * np.pi)),
        )
        for d, g in zip(delays, gains)
    )
    return LtvChannel(taps)


def random_block_fading_channel(
    rng: np.random.Generator, cfg: ModemConfig, length: int
) -> BlockFadingChannel:
    """Random per-symbol impulse responses (unit average power)."""
    gains = rng.normal(size=(cfg.N, length)) + 1j * rng.normal(size=(cfg.N, length))
    gains /= np.sqrt(2.0 * length)
    return BlockFadingChannel(gains=gains, sym_len=cfg.sym_len)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def save_channel(path, ch: LtvChannel) -> None:
    """Write a tap list as JSON."""
    taps = [
        {
            "delay": tap.delay,
            "gain_re": tap.gain.real,
            "gain_im": tap.gain.imag,
            "doppler": tap.doppler,
            "phase": tap.phase,
        }
        for tap in ch.taps
    ]
    with open(path, "w") as fh:
        json.dump({"taps": taps}, fh, indent=2)


def load_channel(path) -> LtvChannel:
    with open(path) as fh:
        spec = json.load(fh)
    return channel_from_spec(spec)


def channel_from_spec(spec: dict) -> LtvChannel:
    """Build an LtvChannel from the JSON tap-list structure."""
    try:
        raw_taps = spec["taps"]
    except (TypeError, KeyError):
        raise ValueError("channel spec must be a mapping with a 'taps' list") from None
    taps = tuple(
        ChannelTap(
            delay=int(t["delay"]),
            gain=complex(float(t.get("gain_re", 0.0)), float(t.get("gain_im", 0.0))),
            doppler=float(t.get("doppler", 0.0)),
            phase=float(t.get("phase", 0.0)),
        )
        for t in raw_taps
    )
    return LtvChannel(taps)


def dump_dd_response(path, response: np.ndarray) -> None:
    """Write a delay-Doppler response as CSV: k,l,re,im,abs."""
    response = np.asarray(response)
    with open(path, "w") as fh:
        fh.write("k,l,re,im,abs\n")
        for k in range(response.shape[0]):
            for l in range(response.shape[1]):
                z = complex(response[k, l])
                fh.write(f"{k},{l},{z.real:.17g},{z.imag:.17g},{abs(z):.17g}\n")
