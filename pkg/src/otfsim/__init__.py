"""OFDM-based OTFS baseband modem library.

Delay-Doppler multiplexing on top of an OFDM modem: the literal
SFFT/OFDM reference cascade, the cancellation-based low-complexity modem,
an exact linear-time-varying channel model with its delay-Doppler
reconstruction, linear detectors over the resulting block-circulant system,
and a complex-multiplication audit of all three modem structures.
"""

from .audit import audit_report, measured_cm, predicted_cm, proposed_to_ofdm_ratio
from .channel import (
    BlockFadingChannel,
    ChannelTap,
    LtvChannel,
    add_awgn,
    apply_channel,
    build_Hn,
    build_dd_response,
    build_doppler_taps,
    doppler_cycles_per_sample,
    identity_channel,
    load_channel,
    random_block_fading_channel,
    random_ltv_channel,
    save_channel,
)
from .detect import (
    BerStat,
    EffectiveSystem,
    assemble_effective,
    bit_error_rate,
    fast_block_solve,
    mmse_detect,
    zf_detect,
)
from .grids import (
    ModemConfig,
    SeparableWindow,
    dump_grid,
    load_grid,
    make_window,
    qam_demap,
    qam_map,
    sfft_inv,
    sfft_windowed,
)
from .modem_fast import demodulate_fast, modulate_fast
from .modem_reference import (
    cp_matrices,
    demodulate_ofdm,
    demodulate_reference,
    modulate_ofdm,
    modulate_reference,
)
from .numerics import (
    CmCounter,
    SingularMatrixError,
    block_circulant_assemble,
    circ_conv2d,
    dft,
    dft_matrix,
    solve_dense,
    unvec,
    vec,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
