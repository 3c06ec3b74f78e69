"""Deceptive wireless beamforming simulator.

Thin Python surface over the C++ core: the OFDM signal model, the
power-minimizing deceptive/nulling beamformers, and the eavesdropper's
range-Doppler estimator.
"""

from dwb._core import (  # noqa: F401
    SPEED_OF_LIGHT,
    ArrayGeometry,
    ArrayResponse,
    Bearings,
    ChannelRealization,
    ConfigError,
    DwbProblem,
    DwbSolution,
    Equalization,
    NullingSolution,
    OfdmGrid,
    PeakEstimate,
    QamConstellation,
    RangeDopplerMap,
    RankError,
    Rng,
    RxFrame,
    SolveDiagnostics,
    SolverError,
    SpoofProfile,
    SymbolKnowledge,
    Topology,
    __version__,
    aliases,
    array_response,
    blind_demod,
    circulant_channel,
    collect_frame,
    dft_matrix,
    deceptive_time_signal,
    find_peak,
    freq_channel_diag,
    idft_matrix,
    least_norm_solve,
    ofdm_demod,
    power_per_symbol,
    psl_db,
    qam_nearest,
    random_topology,
    range_doppler_map,
    remove_symbols,
    scale_comm_symbols,
    simulate_rx,
    solve_dwb,
    solve_nulling,
    spoof_matrix_diag,
    steering_matrix,
    steering_vector,
    tx_power,
    tx_snr_toward,
)
