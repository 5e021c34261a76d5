"""Quasi-ZCZ spreading sequences for cognitive radio.

Kronecker time-frequency synthesis of sequence sets that keep a zero
cross-correlation zone under any spectrum-hole mask, a joint PAPR /
aperiodic-sidelobe waveform optimiser, and a multipath link simulator.
"""

from .construct import QuasiZCZSet, SynthesisError, block_spectra, synthesize, tf_lattice, verify_theorem1
from .optimize import OptimizerConfig, OptResult, PowerSpectrum, optimize_waveform, pareto_sweep, solve_beta
from .seeds import (
    FreqWaveform,
    ZCZError,
    ZCZSeedSet,
    builtin_zcz,
    freq_shift_zcz,
    make_seed_set,
    masked_waveform,
    verify_zcz,
    zadoff_chu,
    zc_waveforms,
    zcz_bounds,
)
from .seqcore import (
    SpectrumMask,
    accf,
    accf_all,
    cyclic_shift,
    dft,
    idft,
    kronecker,
    max_sidelobe,
    papr,
    pccf,
    pccf_all,
    spectral_null,
)
from .simulate import BERResult, ChannelProfile, LinkConfig, eta, run_ber

__version__ = "0.1.0"
