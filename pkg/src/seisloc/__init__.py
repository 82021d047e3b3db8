"""Seismic TDoA source localization with physics-directed training-data augmentation."""

from .field import (
    FieldConfig,
    SensorArray,
    SlownessModel,
    WavyBarrierParams,
    build_synthetic_slowness,
    cell_of,
    place_boundary_sensors,
)
from .locate import DeConfig, de_cost, de_localize, localization_error
from .raytrace import RayMatrix, RayRow, assemble_event_matrix, trace_ray
from .simulate import (
    Dataset,
    NoiseSpec,
    TdoaSample,
    add_noise,
    make_dataset,
    propagation_times,
    sample_real_events,
    tdoa_from_times,
)
from .tomo import TomoInput, TomoPrior, default_prior, estimate_slowness, stack_events

__version__ = "0.1.0"

__all__ = [
    "DeConfig",
    "Dataset",
    "FieldConfig",
    "NoiseSpec",
    "RayMatrix",
    "RayRow",
    "SensorArray",
    "SlownessModel",
    "TdoaSample",
    "TomoInput",
    "TomoPrior",
    "WavyBarrierParams",
    "add_noise",
    "assemble_event_matrix",
    "build_synthetic_slowness",
    "cell_of",
    "de_cost",
    "de_localize",
    "default_prior",
    "estimate_slowness",
    "localization_error",
    "make_dataset",
    "place_boundary_sensors",
    "propagation_times",
    "sample_real_events",
    "stack_events",
    "tdoa_from_times",
    "trace_ray",
]
