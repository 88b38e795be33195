from .session import (
    EditOp,
    RECENCY_BUCKETS,
    SessionState,
    load_session,
    recency_bucket,
    save_session,
)

__all__ = [
    "EditOp",
    "RECENCY_BUCKETS",
    "SessionState",
    "load_session",
    "recency_bucket",
    "save_session",
]
