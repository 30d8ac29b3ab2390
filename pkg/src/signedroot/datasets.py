"""Built-in datasets, addressed by id so tests and the CLI need no files."""

from __future__ import annotations

from .exceptions import InvalidInputError
from .models import Dataset

__all__ = ["DATASET_IDS", "get_dataset", "leukemia21"]

# remission times (weeks) for 21 leukemia patients; a classic small survival
# sample whose second moment is small enough that both hazard parameters
# stay interior at the MLE
_LEUKEMIA21 = (
    1.0, 1.0, 2.0, 2.0, 3.0, 4.0, 4.0, 5.0, 5.0, 6.0, 8.0, 8.0, 9.0,
    10.0, 10.0, 12.0, 14.0, 16.0, 20.0, 24.0, 34.0,
)

_DATASETS = {
    "leukemia21": _LEUKEMIA21,
}

DATASET_IDS = tuple(sorted(_DATASETS))


def leukemia21() -> Dataset:
    return Dataset(_LEUKEMIA21)


def get_dataset(dataset_id: str) -> Dataset:
    """Look up a built-in dataset by id."""
    try:
        return Dataset(_DATASETS[dataset_id])
    except KeyError:
        raise InvalidInputError(
            f"unknown dataset {dataset_id!r}; available: {', '.join(DATASET_IDS)}"
        ) from None
