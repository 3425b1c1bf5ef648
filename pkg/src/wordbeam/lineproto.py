"""Newline-delimited JSON protocol over a child process's stdin/stdout.

Both external provider kinds (victim classifiers and masked-LM
candidate sources) speak the same framing: one JSON object per line,
requests carry an ``id`` that the response must echo.  The adapter is
single-client; a lock serializes concurrent callers.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading
from typing import Any, Sequence

from .errors import ProtocolError


class LineProtocolClient:
    """Owns a child process and exchanges one JSON line per request."""

    def __init__(self, command: str | Sequence[str]):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise ProtocolError("empty provider command")
        self._argv = argv
        self._lock = threading.Lock()
        self._next_id = 0
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ProtocolError(f"failed to launch provider {argv[0]!r}: {exc}") from exc

    @property
    def command(self) -> list[str]:
        return list(self._argv)

    def request(self, payload: dict[str, Any]) -> dict[str, Any]:
        """Send one request and return the matching response object."""
        with self._lock:
            if self._proc.poll() is not None:
                raise ProtocolError(
                    f"provider {self._argv[0]!r} exited with code {self._proc.returncode}"
                )
            request_id = self._next_id
            self._next_id += 1
            line = json.dumps(
                {"id": request_id, **payload}, ensure_ascii=False, separators=(",", ":")
            )
            try:
                assert self._proc.stdin is not None and self._proc.stdout is not None
                self._proc.stdin.write(line + "\n")
                self._proc.stdin.flush()
                response_line = self._proc.stdout.readline()
            except (OSError, ValueError) as exc:
                raise ProtocolError(f"provider transport failure: {exc}") from exc
            if not response_line:
                code = self._proc.poll()
                raise ProtocolError(
                    f"provider closed its output stream (exit code {code})"
                )
            try:
                response = json.loads(response_line)
            except json.JSONDecodeError as exc:
                raise ProtocolError(
                    f"malformed provider response line: {response_line!r}"
                ) from exc
            if not isinstance(response, dict):
                raise ProtocolError(f"provider response is not an object: {response!r}")
            if response.get("id") != request_id:
                raise ProtocolError(
                    f"provider response id {response.get('id')!r} does not match request id {request_id}"
                )
            return response

    def close(self) -> None:
        """Terminate the child process, escalating politely."""
        proc = self._proc
        if proc.poll() is None:
            try:
                if proc.stdin is not None:
                    proc.stdin.close()
                proc.wait(timeout=2)
            except (OSError, subprocess.TimeoutExpired):
                proc.kill()
                proc.wait(timeout=2)

    def __enter__(self) -> "LineProtocolClient":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
