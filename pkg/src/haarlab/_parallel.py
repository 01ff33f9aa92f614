import os

from .errors import ConfigError


def worker_count(requested: int | None = None) -> int:
    """Worker cap: explicit request, else ``HAARLAB_THREADS``, else the CPU count."""
    cap = os.cpu_count() or 1
    env = os.environ.get("HAARLAB_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError(f"not an integer: {env!r}", "HAARLAB_THREADS") from None
        if cap < 1:
            raise ConfigError("must be positive", "HAARLAB_THREADS")
    if requested is not None:
        return max(1, min(int(requested), cap))
    return cap
