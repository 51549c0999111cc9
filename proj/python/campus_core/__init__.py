"""In-process access to the campus application tier.

    >>> import campus_core
    >>> svc = campus_core.Service(data_dir=":memory:", today="2011-02-14")
    >>> svc.load_fixture(open("fixtures/f1.json").read())
    >>> token = svc.login(*svc.reset_password("S001"))
    >>> svc.call("eligible_units", token, student_id="S001", campus="LTK", term="2011-T1")
"""

import itertools
import json

from . import _campus
from ._errors import CampusError

__all__ = ["CampusError", "Service", "migrate", "error_catalog", "parse_coursework_csv"]

migrate = _campus.migrate
error_catalog = _campus.error_catalog
parse_coursework_csv = _campus.parse_coursework_csv


class Service:
    """One application tier over a store. Operations use the wire names."""

    def __init__(self, data_dir="data", today=None, pbkdf2_iterations=None, **settings):
        merged = {"data.dir": str(data_dir)}
        if today is not None:
            merged["clock.today"] = today
        if pbkdf2_iterations is not None:
            merged["security.pbkdf2_iterations"] = str(pbkdf2_iterations)
        merged.update({k: str(v) for k, v in settings.items()})
        self._svc = _campus.Service(merged)
        self._ids = itertools.count(1)

    def dispatch(self, message):
        """Send one wire message (a dict); returns the response dict."""
        return json.loads(self._svc.dispatch(json.dumps(message)))

    def call(self, operation, token=None, **payload):
        """Run an operation; returns its payload or raises CampusError."""
        message = {"v": 1, "request_id": f"py-{next(self._ids)}", "operation": operation, "payload": payload}
        if token:
            message["session_token"] = token
        response = self.dispatch(message)
        if response["status"] != "Ok":
            raise CampusError(response["error_code"], response.get("error_message", ""), response.get("payload", {}))
        return response["payload"]

    def login(self, username, password):
        return self.call("login", username=username, password=password)["token"]

    def load_fixture(self, document):
        if not isinstance(document, str):
            document = json.dumps(document)
        return self._svc.load_fixture(document)

    def reset_password(self, person_id):
        return self._svc.reset_password(person_id)

    def report(self, kind, **filters):
        return self._svc.report(kind, {k: str(v) for k, v in filters.items()})
