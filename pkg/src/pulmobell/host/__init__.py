from .store import SessionRecord, SessionStore, Subscription
from .link import DeviceLink
from .http_api import create_app
from .device_server import DeviceTCPServer

__all__ = [
    "SessionStore",
    "SessionRecord",
    "Subscription",
    "DeviceLink",
    "create_app",
    "DeviceTCPServer",
]
