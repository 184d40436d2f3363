"""encoder_adapter: frozen encoders behind a stdio NDJSON embedding protocol."""

__version__ = "0.1.0"

from .backbones import AdapterConfig, EchoBackbone, ModelLoadError, load_backbone
from .protocol import PROTOCOL_VERSION, ProtocolFault
from .server import serve

__all__ = [
    "__version__",
    "AdapterConfig",
    "EchoBackbone",
    "ModelLoadError",
    "PROTOCOL_VERSION",
    "ProtocolFault",
    "load_backbone",
    "serve",
]
