"""Local gateway service and the batch command line."""

from gazebench.gateway.protocol import (
    MESSAGE_KINDS,
    decode_message,
    encode_message,
    nan_to_none,
    none_to_nan,
)
from gazebench.gateway.service import GatewayCore, ServiceConfig, WorkbenchService

__all__ = [
    "GatewayCore",
    "MESSAGE_KINDS",
    "ServiceConfig",
    "WorkbenchService",
    "decode_message",
    "encode_message",
    "nan_to_none",
    "none_to_nan",
]
