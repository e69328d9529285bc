"""Cryogenic CMOS modeling toolkit: compact device model, variation
statistics, RF extraction and circuit checks."""

from ._core import (
    CryoError,
    DomainError,
    ParseError,
    SchemaError,
    Polarity,
    Rep,
    DeviceGeometry,
    BiasPoint,
    ModelCard,
    EvalResult,
    drain_current,
    vth,
    vth_constant_current,
    subthreshold_swing,
    off_current,
    demo_card,
    read_card,
    write_card,
    TwoPort,
    convert,
    read_touchstone,
    write_touchstone,
    SmallSignalSet,
    synth_small_signal,
    coldfet_extract,
    ft_extract,
    ft_analytic,
    pelgrom_sigma,
    fit_pelgrom,
    demo_mismatch_model,
    ring_oscillator,
    sram_snm,
    iddq,
    comparator_margin,
    flash_adc,
)

__version__ = "0.1.0"
