__all__ = [
    "cumulate_prefixes",
    "event_is_ignored",
    "parse_event_code",
]

import re
from collections.abc import Collection

event_code_pattern = re.compile(r"(?P<prefixes>[a-zA-Z.]+)(?P<increment>\d+)")


def parse_event_code(code: str) -> tuple[list[str], int]:
    """
    Split an event code into its prefix path and increment.

    Arguments:
        code (str): Code such as ``HARDY.POLE0001``.

    Returns:
        tuple[list[str], int]: ``(["HARDY", "POLE"], 1)`` for the example above.

    Raises:
        ValueError: The code does not follow the ``PREFIX.PREFIX####`` layout.
    """
    match = event_code_pattern.fullmatch(code.strip())
    if match is None:
        raise ValueError(f"Malformed event code '{code}'.")
    match_dict = match.groupdict()
    groups = match_dict["prefixes"].upper().split(".")
    increment = int(match_dict["increment"])
    return groups, increment


def cumulate_prefixes(prefixes: list[str]) -> list[str]:
    """``["HARDY", "POLE"]`` -> ``["HARDY.POLE", "HARDY"]``."""
    if not prefixes:
        return []
    current = ".".join(prefixes)
    return [current] + cumulate_prefixes(prefixes[:-1])


def event_is_ignored(code: str, ignored: Collection[str]) -> bool:
    """True when any cumulative prefix of ``code`` (or the full code) is listed in ``ignored``."""
    wanted = {item.strip().upper() for item in ignored}
    if code.upper() in wanted:
        return True
    prefixes, _ = parse_event_code(code)
    return any(prefix in wanted for prefix in cumulate_prefixes(prefixes))
