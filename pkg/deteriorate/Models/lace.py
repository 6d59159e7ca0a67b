"""
LACE index baseline.

The score adds points for Length of stay, Acuity of admission, Comorbidity
(Charlson index) and Emergency-department visits in the previous six months,
using the published van Walraven point mapping.
"""

from dataclasses import dataclass

from deteriorate.errors import DomainError

# Patients scoring strictly above this value are flagged as high risk
LACE_THRESHOLD = 10

ACUTE_POINTS = 3
MAX_ED_POINTS = 4

# (upper bound of stay in days, exclusive) -> points
_LENGTH_OF_STAY_BANDS = (
    (1, 0),
    (2, 1),
    (3, 2),
    (4, 3),
    (7, 4),
    (14, 5),
)
_LONG_STAY_POINTS = 7

# Charlson index -> points; 4 and above score 5
_CHARLSON_POINTS = {0: 0, 1: 1, 2: 2, 3: 3}
_HIGH_CHARLSON_POINTS = 5


@dataclass(frozen=True)
class LaceInputs:
    """Discharge-time inputs of the LACE index."""

    length_of_stay_days: float
    acute_admission: bool
    charlson_index: int
    ed_visits_6mo: int

    def __post_init__(self):
        if self.length_of_stay_days < 0:
            raise DomainError("length_of_stay_days must be non-negative")
        if self.charlson_index < 0 or int(self.charlson_index) != self.charlson_index:
            raise DomainError("charlson_index must be a non-negative integer")
        if self.ed_visits_6mo < 0 or int(self.ed_visits_6mo) != self.ed_visits_6mo:
            raise DomainError("ed_visits_6mo must be a non-negative integer")

    @classmethod
    def from_dict(cls, data):
        return cls(
            length_of_stay_days=float(data["length_of_stay_days"]),
            acute_admission=bool(data["acute_admission"]),
            charlson_index=int(data["charlson_index"]),
            ed_visits_6mo=int(data["ed_visits_6mo"]),
        )

    def to_dict(self):
        return {
            "length_of_stay_days": self.length_of_stay_days,
            "acute_admission": self.acute_admission,
            "charlson_index": self.charlson_index,
            "ed_visits_6mo": self.ed_visits_6mo,
        }


def length_of_stay_points(days):
    """Points for the L component."""
    for upper, points in _LENGTH_OF_STAY_BANDS:
        if days < upper:
            return points
    return _LONG_STAY_POINTS


def charlson_points(index):
    """Points for the C component."""
    return _CHARLSON_POINTS.get(index, _HIGH_CHARLSON_POINTS)


def lace_score(inputs):
    """
    Compute the LACE index of one patient.

    Args:
        inputs (LaceInputs): discharge-time inputs

    Returns:
        int: score in [0, 19]
    """
    score = length_of_stay_points(inputs.length_of_stay_days)
    if inputs.acute_admission:
        score += ACUTE_POINTS
    score += charlson_points(inputs.charlson_index)
    score += min(inputs.ed_visits_6mo, MAX_ED_POINTS)
    return int(score)


def lace_classify(score, threshold=LACE_THRESHOLD):
    """Return 1 (high risk) when the score is strictly above the threshold."""
    return int(score > threshold)
