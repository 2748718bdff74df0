from .constants import (
    CONFIG_INVALID, DIVERGENCE, EMPTY_ENSEMBLE, ERROR_CODES, FACTORIZATION_FAILED, IO_FAILED,
    NON_FINITE, SHAPE_MISMATCH, VALIDATION_FAILED,
)


class DmftError(Exception):
    message = 'Unknown error'
    code = 1

    def __init__(self, message=None, code=None):
        self.code = code or self.code
        self.message = message or ERROR_CODES.get(self.code, self.message)
        super().__init__(self.message)

    def __str__(self):
        return "({self.code}) {self.message}".format(self=self)


class ConfigError(DmftError):
    code = CONFIG_INVALID

    def __init__(self, message=None, keys=()):
        self.keys = tuple(keys)
        super().__init__(message)


class ShapeMismatchError(DmftError):
    code = SHAPE_MISMATCH


class NonFiniteError(DmftError):
    code = NON_FINITE


class DivergenceError(DmftError):
    code = DIVERGENCE

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or 'Dynamics diverged at step {0}'.format(step))


class FactorizationError(DmftError):
    code = FACTORIZATION_FAILED

    def __init__(self, ladder, message=None):
        self.ladder = tuple(ladder)
        super().__init__(
            message or 'Cholesky failed for jitter ladder {0}'.format(list(self.ladder)))


class EmptyEnsembleError(DmftError):
    code = EMPTY_ENSEMBLE


class ValidationError(DmftError):
    code = VALIDATION_FAILED


class ArtifactError(DmftError):
    code = IO_FAILED


DMFT_ERROR_CODES = {e.code: e for e in
                    [
                        DmftError,
                        ConfigError,
                        ShapeMismatchError,
                        NonFiniteError,
                        DivergenceError,
                        FactorizationError,
                        EmptyEnsembleError,
                        ValidationError,
                        ArtifactError,
                    ]
                    }
