from enum import Enum

from core.exceptions import ConfigError


class ShiftRegime(Enum):
    """
    Which factor of P_XY is shared by the null and the alternative.

    LABEL_SHIFT fixes P(X|Y): deviations are attributed to P(Y).
    CONCEPT_SHIFT fixes P(X): deviations are attributed to P(Y|X).
    """
    LABEL_SHIFT = "label_shift"
    CONCEPT_SHIFT = "concept_shift"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError:
            raise ConfigError(f"Unknown shift regime {value!r}; expected one of "
                              f"{', '.join(r.value for r in cls)}.")
