from app.levy_core.memm import ell, find_memm_tilt, memm_model, tilt_measure
from app.levy_core.models import (
    GroupParams,
    LevyModel,
    MertonParams,
    group_params_merton,
    group_params_numeric,
    merton_levy_density,
)

__all__ = [
    "GroupParams",
    "LevyModel",
    "MertonParams",
    "ell",
    "find_memm_tilt",
    "group_params_merton",
    "group_params_numeric",
    "memm_model",
    "merton_levy_density",
    "tilt_measure",
]
