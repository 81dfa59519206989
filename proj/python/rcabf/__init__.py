# SPDX-License-Identifier: Apache-2.0
"""Row-column array beamforming: simulation, DAS, FMAS and RC-FMAS compounding."""

from ._rcabf import (  # noqa: F401
    ExperimentConfig,
    Method,
    Orientation,
    PairMode,
    ProbeGeometry,
    canonical_config,
    config_hash,
    cyst_preset,
    element_position,
    make_schedule,
    pair_count_fmas,
    pair_count_rcfmas,
    parse_config,
    psf_preset,
    run_experiment,
    rx_delay,
    signed_sqrt_pair,
    total_delay,
    tukey_window,
    tx_delay,
)

__all__ = [name for name in dir() if not name.startswith("_")]
