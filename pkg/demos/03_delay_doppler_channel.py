"""How a time-varying channel looks from the delay-Doppler domain.

A multipath channel whose taps drift slowly (constant within each OFDM
symbol) acts on the delay-Doppler grid as a single 2-D circular convolution
with a small, static kernel: delays show up along one axis, Doppler shifts
along the other. This script builds that kernel two ways -- from the
channel matrices and from the end-to-end pipeline -- and shows where the
picture breaks down once taps vary within a symbol.
"""

import numpy as np

from otfsim import (
    BlockFadingChannel,
    ChannelTap,
    LtvChannel,
    ModemConfig,
    apply_channel,
    build_dd_response,
    build_doppler_taps,
    circ_conv2d,
    demodulate_reference,
    make_window,
    modulate_fast,
)

cfg = ModemConfig(M=16, N=8, cp_len=4)
window = make_window("rectangular", cfg.M, cfg.N)
rng = np.random.default_rng(7)

# two paths: delay 0, and delay 3 with one Doppler cycle per frame
nu = 1.0 / cfg.frame_len
ch = LtvChannel(
    (
        ChannelTap(delay=0, gain=0.8),
        ChannelTap(delay=3, gain=0.6j, doppler=nu),
    )
)

taps = build_doppler_taps(ch, window.wr, cfg)
response = build_dd_response(taps, window)

print("dominant |response| entries (delay bin, Doppler bin) -> magnitude:")
flat = np.argsort(np.abs(response).ravel())[::-1][:4]
for idx in flat:
    k, l = np.unravel_index(idx, response.shape)
    print(f"  ({k}, {l}) -> {np.abs(response[k, l]):.3f}")
print("the delay-0 path sits at (0, 0); the delayed, shifted path near (3, 1)")

# in the block-fading regime the convolution picture is exact
bf = BlockFadingChannel(
    gains=(rng.normal(size=(cfg.N, 4)) + 1j * rng.normal(size=(cfg.N, 4))) / np.sqrt(8),
    sym_len=cfg.sym_len,
)
x = rng.normal(size=(cfg.M, cfg.N)) + 1j * rng.normal(size=(cfg.M, cfg.N))
pipeline = demodulate_reference(apply_channel(modulate_fast(x, cfg), bf), window, cfg)
kernel = build_dd_response(build_doppler_taps(bf, window.wr, cfg), window)
err = np.linalg.norm(pipeline - circ_conv2d(kernel, x)) / np.linalg.norm(pipeline)
print(f"\nblock-fading channel: |pipeline - kernel (*) X| / |pipeline| = {err:.2e}")

# with fast within-symbol variation the kernel is only an approximation...
fast_ch = LtvChannel((ChannelTap(delay=0, gain=1.0, doppler=0.02),))
pipeline = demodulate_reference(apply_channel(modulate_fast(x, cfg), fast_ch), window, cfg)
kernel = build_dd_response(build_doppler_taps(fast_ch, window.wr, cfg), window)
err = np.linalg.norm(pipeline - circ_conv2d(kernel, x)) / np.linalg.norm(pipeline)
print(f"within-symbol Doppler:  residual {err:.2e} (2-D convolution no longer exact)")

# ...but the full block-circulant linear system stays exact for any channel
from otfsim import assemble_effective, vec

h_eff = assemble_effective(fast_ch, window, cfg).h_eff
err = np.linalg.norm(vec(pipeline) - h_eff @ vec(x)) / np.linalg.norm(vec(pipeline))
print(f"same channel, effective linear system: residual {err:.2e}")
