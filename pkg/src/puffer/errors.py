"""Error types surfaced by the safety engine and the wire protocol."""


class PufferError(Exception):
    """Base class; ``code`` is the stable tag used on the wire."""

    code = "error"


class UnknownPlayer(PufferError):
    code = "unknown_player"


class InvalidRadius(PufferError):
    code = "invalid_radius"


class IllegalValue(PufferError):
    code = "illegal_value"


class SelfReference(PufferError):
    code = "self_reference"


class SelfSuggestion(PufferError):
    code = "self_suggestion"


class UnknownSuggestion(PufferError):
    code = "unknown_suggestion"


class NotAddressee(PufferError):
    code = "not_addressee"


class AlreadyResolved(PufferError):
    code = "already_resolved"


class InvalidCapacity(PufferError):
    code = "invalid_capacity"


class RoomFull(PufferError):
    code = "room_full"


class AlreadyInRoom(PufferError):
    code = "already_in_room"


class UnknownRoom(PufferError):
    code = "unknown_room"


class NotInRoom(PufferError):
    code = "not_in_room"


class ProtocolError(PufferError):
    code = "protocol_error"


class InvalidScript(PufferError):
    code = "invalid_script"
