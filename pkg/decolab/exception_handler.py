import logging
from typing import Dict, Tuple

from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework.exceptions import ValidationError
from rest_framework.serializers import as_serializer_error

from .exceptions import EXIT_SERVER_ERROR, ConfigError, DecolabError, OutputError
from .handlers import exc_detail_handler, is_exc_detail_same_as_default_detail
from .settings import decolab_settings

logger = logging.getLogger(__name__)


def exception_handler(exc: Exception, context: Dict = None) -> Tuple[Dict, int]:
    """
    Returns the error document and the exit code for any given exception.

    By default this handles any `DecolabError`, `OSError`, which is
    reported as an output failure, and Django/DRF `ValidationError`,
    which is reported as a configuration error.

    Any unhandled exceptions will log the exception message, and
    will cause exit code 1.
    """

    if isinstance(exc, OSError):
        exc = OutputError(str(exc))

    if isinstance(exc, (DjangoValidationError, ValidationError)):
        exc = ConfigError(as_serializer_error(exc))

    extra_handlers = decolab_settings.EXTRA_HANDLERS
    if extra_handlers:
        for handler in extra_handlers:
            handler(exc)

    # unhandled exceptions, which should exit with 1 and log the exception
    if not isinstance(exc, DecolabError):
        logger.exception(exc)
        data = {"title": "Server error."}
        return data, EXIT_SERVER_ERROR

    data = {}
    if isinstance(exc.detail, (list, dict)) and isinstance(exc, ConfigError):
        data["title"] = "Validation error."
        exc_detail_handler(data, exc.detail)
    else:
        data["title"] = exc.default_detail
        if not is_exc_detail_same_as_default_detail(exc):
            exc_detail_handler(
                data, [exc.detail] if isinstance(exc.detail, str) else exc.detail
            )

    if context and context.get("scenario"):
        data["scenario"] = context["scenario"]

    return data, exc.exit_code
