from typing import Dict, List, Union

EXIT_OK = 0
EXIT_SERVER_ERROR = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3
EXIT_OUTPUT_ERROR = 4


class DecolabError(Exception):
    """
    Base class for decolab exceptions.

    Subclasses should provide `exit_code`, `default_detail` and
    `default_code` properties. `detail` may be a string, a list of strings
    or a (nested) dict of field names to messages.
    """

    exit_code = EXIT_SERVER_ERROR
    default_detail = "A server error occurred."
    default_code = "error"

    def __init__(self, detail: Union[str, List, Dict] = None, code: str = None):
        if detail is None:
            detail = self.default_detail
        if code is None:
            code = self.default_code

        self.detail = detail
        self.code = code
        super().__init__(detail)

    def __str__(self) -> str:
        return str(self.detail)


class ConfigError(DecolabError):
    """A scenario configuration failed validation."""

    exit_code = EXIT_CONFIG_ERROR
    default_detail = "Invalid configuration."
    default_code = "invalid_config"


class OutputError(DecolabError):
    exit_code = EXIT_OUTPUT_ERROR
    default_detail = "Could not write outputs."
    default_code = "output_error"


class NumericalError(DecolabError):
    exit_code = EXIT_NUMERICAL_ERROR
    default_detail = "Numerical failure."
    default_code = "numerical_error"


class InvalidParameter(NumericalError):
    default_detail = "Invalid parameter."
    default_code = "invalid_parameter"


class EmptyCatalogue(NumericalError):
    default_detail = "Mode catalogue is empty."
    default_code = "empty_catalogue"


class NonRelaxingCatalogue(NumericalError):
    default_detail = "Catalogue contains a non-decaying mode."
    default_code = "non_relaxing_catalogue"


class UndefinedEffectiveRate(NumericalError):
    default_detail = "Effective rate is undefined for zero total amplitude."
    default_code = "undefined_effective_rate"


class QuadratureError(NumericalError):
    default_detail = "Quadrature did not converge."
    default_code = "quadrature_error"


class EigensolverError(NumericalError):
    default_detail = "Eigensolver did not converge."
    default_code = "eigensolver_error"


class InsufficientSamples(NumericalError):
    default_detail = "Not enough samples in the fit window."
    default_code = "insufficient_samples"


class InvalidSamples(NumericalError):
    default_detail = "Samples must have positive magnitudes."
    default_code = "invalid_samples"


class MismatchedCutoffs(NumericalError):
    default_detail = "States have different cutoffs."
    default_code = "mismatched_cutoffs"


class LengthMismatch(NumericalError):
    default_detail = "Coefficient vectors have different lengths."
    default_code = "length_mismatch"


class InvalidRegime(NumericalError):
    default_detail = "Macroscopicity conditions are violated."
    default_code = "invalid_regime"


class DepletedState(NumericalError):
    default_detail = "State norm vanished."
    default_code = "depleted_state"


class NonHermitian(NumericalError):
    default_detail = "Matrix is not Hermitian."
    default_code = "non_hermitian"


class DimensionMismatch(NumericalError):
    default_detail = "Dimensions do not match."
    default_code = "dimension_mismatch"


class OrderingError(NumericalError):
    default_detail = "Rates are not ordered."
    default_code = "ordering_error"


class NoCrossover(NumericalError):
    default_detail = "No crossover on the searched horizon."
    default_code = "no_crossover"


class OverlappingBands(NumericalError):
    default_detail = "Band supports overlap."
    default_code = "overlapping_bands"


class CommutatorError(NumericalError):
    default_detail = "Part Hamiltonians do not commute."
    default_code = "commutator_error"
