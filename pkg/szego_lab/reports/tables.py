"""
Plot-ready CSV tables.

A table's file name follows from its class name, ``SpectralTrace`` is written to
``spectral_traces.csv``. Files use RFC-4180 quoting and CRLF line ends.
"""

__all__ = [
    "INVARIANT_COLUMNS",
    "CsvTable",
    "GrowthWindow",
    "InvariantAudit",
    "SpectralTrace",
    "Trajectory",
]

import csv
import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import ClassVar, Self

import inflection
import numpy as np
from numpy.typing import NDArray

CellT = float | int | str | bool | None


def _render(value: CellT) -> str:
    match value:
        case None:
            return ""
        case bool():
            return "1" if value else "0"
        case float():
            return format(value, ".17g")
        case _:
            return str(value)


def _parse(text: str) -> float | str | None:
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        return text


class CsvTable:
    """
    Ordered rows with a fixed header.

    Subclasses list their ``columns``; tables whose width depends on the run (mode or level
    counts) pass ``columns`` explicitly.
    """

    columns: ClassVar[tuple[str, ...]] = ()

    def __init__(self: Self, columns: Sequence[str] | None = None) -> None:
        self.header: tuple[str, ...] = tuple(columns) if columns is not None else type(self).columns
        if not self.header:
            raise ValueError(f"{type(self).__name__} needs at least one column.")
        self.rows: list[dict[str, CellT]] = []

    @classmethod
    def file_name(cls) -> str:
        return f"{inflection.pluralize(inflection.underscore(cls.__name__))}.csv"

    def __len__(self: Self) -> int:
        return len(self.rows)

    def append(self: Self, values: Mapping[str, CellT]) -> None:
        unknown = set(values) - set(self.header)
        if unknown:
            raise ValueError(f"Unknown columns for {type(self).__name__}: {sorted(unknown)}.")
        self.rows.append({name: values.get(name) for name in self.header})

    def extend(self: Self, rows: Iterable[Mapping[str, CellT]]) -> None:
        for row in rows:
            self.append(row)

    def column(self: Self, name: str) -> NDArray[np.float64]:
        """Numeric column; blanks become ``nan``."""
        if name not in self.header:
            raise KeyError(name)
        return np.array(
            [math.nan if row[name] is None else float(row[name]) for row in self.rows],  # type: ignore[arg-type]
            dtype=np.float64,
        )

    def write(self: Self, directory: Path) -> Path:
        path = Path(directory) / self.file_name()
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
            writer.writerow(self.header)
            for row in self.rows:
                writer.writerow([_render(row[name]) for name in self.header])
        return path

    @classmethod
    def read(cls, directory: Path) -> Self:
        path = Path(directory) / cls.file_name()
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            table = cls(header)
            for record in reader:
                table.rows.append({name: _parse(text) for name, text in zip(header, record, strict=True)})
        return table


INVARIANT_COLUMNS: dict[str, str] = {"energy": "E_alpha", "mass": "Q", "momentum": "M"}


class Trajectory(CsvTable):
    """
    Samples ``t``, Sobolev norms, tail size, the conserved quantities and the first ``n``
    coefficients as ``re_k``, ``im_k``.
    """

    columns = ("t", "h_half", "h_one", "h_two", "tail", "resolved", *INVARIANT_COLUMNS.values())

    @classmethod
    def for_modes(cls, n: int) -> "Trajectory":
        coefficient_columns = [name for k in range(n) for name in (f"re_{k}", f"im_{k}")]
        return cls([*cls.columns, *coefficient_columns])


class InvariantAudit(CsvTable):
    """
    Conserved quantities per sample: ``E_alpha``, ``Q``, ``M``, the hierarchy ``L_n``, the pairs
    ``(sigma_k, ell_k)`` of the positive ``K`` levels, and the running relative drift
    ``drift_X = |X(t) - X(0)| / max(|X(0)|, 1)`` of every conserved column.
    """

    columns = ("t", *INVARIANT_COLUMNS.values())

    @classmethod
    def for_hierarchy(cls, n_max: int, n_levels: int = 0) -> "InvariantAudit":
        conserved = [*INVARIANT_COLUMNS.values(), *(f"L_{n}" for n in range(n_max + 1))]
        levels = [*(f"sigma_{k + 1}" for k in range(n_levels)), *(f"ell_{k + 1}" for k in range(n_levels))]
        return cls(["t", *conserved, *levels, *(f"drift_{name}" for name in conserved)])


class SpectralTrace(CsvTable):
    """
    Dominant ``rho_j`` and ``sigma_k`` per sample, padded with blanks, the pole radius, the
    distance ``gap`` between the ``H`` and ``K`` values, and the zeros of the inner function of
    each ``K`` level as ``psi_k_re_i``, ``psi_k_im_i``.
    """

    columns = ("t", "frozen_labels", "pole_radius", "smallest_sigma", "gap")

    @classmethod
    def for_levels(cls, n_h: int, n_k: int, zero_counts: Sequence[int] = ()) -> "SpectralTrace":
        zero_columns = [
            name
            for k, count in enumerate(zero_counts)
            for i in range(count)
            for name in (f"psi_{k + 1}_re_{i + 1}", f"psi_{k + 1}_im_{i + 1}")
        ]
        return cls(
            [
                *cls.columns,
                *(f"rho_{j + 1}" for j in range(n_h)),
                *(f"sigma_{k + 1}" for k in range(n_k)),
                *zero_columns,
            ]
        )


class GrowthWindow(CsvTable):
    columns = ("s", "t_lo", "t_hi", "slope", "intercept", "r_squared", "c_alpha", "samples")
