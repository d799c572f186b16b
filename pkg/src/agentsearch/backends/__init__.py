from .base import (
    ChatBackend,
    ChatMessage,
    ChatRequest,
    ChatResponse,
    MediaBackend,
    MediaGenRequest,
    MediaGenResponse,
    default_params,
    fixture_key,
    user,
)
from .gateway import Gateway
from .scripted import (
    CallableChatBackend,
    RecordingBackend,
    ReplayBackend,
    ScriptedBackend,
    read_fixture_file,
    scripted_backend_load,
)
from .stub import StubMediaBackend
from .synthetic import SyntheticChatBackend

__all__ = [
    "CallableChatBackend", "ChatBackend", "ChatMessage", "ChatRequest", "ChatResponse", "Gateway",
    "MediaBackend", "MediaGenRequest", "MediaGenResponse", "RecordingBackend", "ReplayBackend",
    "ScriptedBackend", "StubMediaBackend", "SyntheticChatBackend", "default_params", "fixture_key",
    "read_fixture_file", "scripted_backend_load", "user",
]
