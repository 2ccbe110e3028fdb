from .core import ServerCore

__all__ = ["ServerCore"]
