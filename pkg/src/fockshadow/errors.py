"""Exception taxonomy shared by the library and the command-line tool.

Exit-code mapping used by the CLI: ConfigError -> 2, GuardError -> 3,
CacheError -> 4. Everything else is a plain bug.
"""


class FockShadowError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FockShadowError):
    """Invalid user-supplied configuration (bad file, bad flag, bad value)."""


class GuardError(FockShadowError):
    """A requested computation exceeds the configured dimension caps."""


class CacheError(FockShadowError):
    """Channel cache is missing, corrupt, or written by an incompatible version."""


class PhotonNumberMismatch(FockShadowError):
    """Occupations do not share the required total photon number."""
