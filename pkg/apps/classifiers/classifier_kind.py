from enum import Enum

from core.exceptions import ConfigError


class ClassifierKind(Enum):
    # indicator(posterior > tau), deterministic
    THRESHOLD = "threshold"
    # Bernoulli(posterior), randomized at prediction time
    BAYES = "bayes"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigError(f"Unknown classifier {value!r}; expected 'threshold' or 'bayes'.")
