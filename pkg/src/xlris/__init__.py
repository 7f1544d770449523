"""Near-field wideband channel estimation for extremely large RIS-aided mmWave links.

Submodules
----------
geometry     steering vectors and path-difference geometry
channel      ground-truth channel synthesis
measurement  training schedules and received pilots
squint       near-field beam squint and the Fresnel gain model
dictionary   angular and spherical-domain wideband dictionaries
estimators   LS, Kronecker OMP, MMPSR and the oracle baseline
bench        seeded Monte-Carlo experiments
"""
from .config import SystemConfig
from .geometry import CarrierGrid, SphericalPoint, UpaShape

__version__ = "0.1.0"

__all__ = ["SystemConfig", "CarrierGrid", "SphericalPoint", "UpaShape", "__version__"]
