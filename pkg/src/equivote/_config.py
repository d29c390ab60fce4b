import os

DEFAULT_GUARD_N = 22
DEFAULT_AUT_GUARD_N = 13
GUARD_ENV_VAR = "EQUIVOTE_GUARD_N"


class GuardExceeded(RuntimeError):
    """An exhaustive computation was requested beyond its configured size cap."""


def enumeration_guard(override=None):
    if override is not None:
        return int(override)
    env = os.environ.get(GUARD_ENV_VAR)
    if env:
        return int(env)
    return DEFAULT_GUARD_N


def check_guard(n, guard, what="enumeration"):
    if n > guard:
        raise GuardExceeded(f"{what} over 2^{n} profiles exceeds guard n <= {guard}")
