import json


class CampusError(Exception):
    """A catalog error raised by the application tier."""

    def __init__(self, code, message, details="{}"):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.details = json.loads(details) if isinstance(details, str) else details
