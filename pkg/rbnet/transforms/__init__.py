from rbnet.transforms.balanced import CopySchedule, balanced_to_constrained_k1, required_copies, word_units
from rbnet.transforms.constrained import lift_one_to_k, paired_copies, weak_to_strong
from rbnet.transforms.unconstrained import (
    copies_for,
    to_f_constrained,
    to_id_constrained,
    to_one_locally_constrained,
)

__all__ = [
    "CopySchedule",
    "balanced_to_constrained_k1",
    "copies_for",
    "lift_one_to_k",
    "paired_copies",
    "required_copies",
    "to_f_constrained",
    "to_id_constrained",
    "to_one_locally_constrained",
    "weak_to_strong",
    "word_units",
]
