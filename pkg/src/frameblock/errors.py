"""Exception types shared across the package."""

from __future__ import annotations


class FrameblockError(Exception):
    """Base class for all package errors."""


class MalformedUrl(FrameblockError):
    """A URL is missing the scheme or host needed to form an origin."""

    def __init__(self, url: str, frame_id: int | None = None):
        self.url = url
        self.frame_id = frame_id
        where = f" (frame {frame_id})" if frame_id is not None else ""
        super().__init__(f"cannot extract an origin from {url!r}{where}")


class UnknownFrame(FrameblockError):
    def __init__(self, frame_id: int):
        self.frame_id = frame_id
        super().__init__(f"frame id {frame_id} is not in the tree")


class UnknownResource(FrameblockError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"redirect target {name!r} has no resource body")


class MalformedLog(FrameblockError):
    """An event-log record failed validation; carries the record index."""

    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"record {index}: {reason}")
