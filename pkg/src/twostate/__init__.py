"""Pre- and post-selected quantum ensembles: ABL probabilities, weak values,
von Neumann meter simulation and superoscillations."""
from . import meter, qcore, scenarios, superosc, tsv
from .errors import (
    AllAmplitudesZero,
    DimensionMismatch,
    IncompleteBasis,
    NotHermitian,
    NotUnitary,
    OrthogonalSelection,
    TwoStateError,
    ZeroModulus,
)
from .meter import MeterConfig, ReadoutDensity
from .qcore import Observable, StateVector, UnitaryMap, ket
from .tsv import GeneralizedTwoState, MeasurementEvent, PrePostEnsemble, abl_probability, weak_value

__version__ = "0.1.0"
