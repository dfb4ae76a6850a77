import os

ENV_VAR = "LOCC_CERT_THREADS"


def thread_cap() -> int:
    """Worker count for seed sweeps: ``$LOCC_CERT_THREADS`` if set, else the CPU count."""
    raw = os.environ.get(ENV_VAR)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1
