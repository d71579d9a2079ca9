"""Exception hierarchy shared across the package."""


class FirewatchError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FirewatchError):
    """Rule-base, scenario or service configuration is invalid."""


class InvalidMeasurementError(FirewatchError):
    """A measurement field is missing, non-finite or out of its legal range."""


class StaleTimestampError(InvalidMeasurementError):
    """Measurement timestamp does not strictly increase."""


class CryptoError(FirewatchError):
    """Base class for signing/encryption failures."""


class OneTimeKeyReuseError(CryptoError):
    """A one-time signing key was asked to sign a second message."""


class KeyPoolExhaustedError(CryptoError):
    """Every one-time key in a device's pool has been used."""


class VerificationError(CryptoError):
    """Signature, proof or envelope verification failed."""


class UnknownDeviceError(FirewatchError):
    """Device id is not present in the key registry."""


class ScenarioError(ConfigError):
    """Simulation scenario file is malformed."""
