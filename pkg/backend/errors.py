# 所有模組共用的例外類別
class ZonedLedgerError(Exception):
    """Base class for every error raised by the zoned ledger simulator."""


class ConfigurationError(ZonedLedgerError, ValueError):
    """參數設定不合法（非質數、m 為奇數、n 不能被 m 整除 ...）"""


class InvalidInputError(ZonedLedgerError, ValueError):
    pass


class FieldTooSmallError(ConfigurationError):
    pass


class InsufficientSharesError(ZonedLedgerError, ValueError):
    pass


class DecodeError(ZonedLedgerError, ValueError):
    pass


class RecordNotFoundError(ZonedLedgerError, KeyError):
    pass


class UnrepairableError(ZonedLedgerError):
    pass


class AmbiguousRecoveryError(ZonedLedgerError):
    pass


class UnrecoverableError(ZonedLedgerError):
    pass


class MiningExhaustedError(ZonedLedgerError):
    pass


class UndefinedError(ZonedLedgerError, ValueError):
    pass
