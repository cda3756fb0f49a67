"""Base factory for creating test data with seeded random helpers."""
import math
import random
from typing import Any, Dict, Generic, Optional, Type, TypeVar

from pydantic import BaseModel

T = TypeVar("T", bound=BaseModel)


class BaseFactory(Generic[T]):
    """Base factory class for creating validated test objects."""

    model: Optional[Type[T]] = None
    rng: random.Random = random.Random(20240611)

    @classmethod
    def reseed(cls, seed: int) -> None:
        """Reset the shared generator so a test sees a fixed sequence."""
        cls.rng.seed(seed)

    @classmethod
    def random_float(cls, min_val: float = 0.0, max_val: float = 1.0) -> float:
        """Generate a random float."""
        return cls.rng.uniform(min_val, max_val)

    @classmethod
    def random_log_float(cls, min_val: float, max_val: float) -> float:
        """Generate a float uniform in log space (for coefficients spanning decades)."""
        return 10 ** cls.rng.uniform(math.log10(min_val), math.log10(max_val))

    @classmethod
    def random_fraction(cls, low: float = 0.05, high: float = 0.95) -> float:
        """Generate a volume fraction strictly inside (0, 1), rounded to 3 places."""
        return round(cls.rng.uniform(low, high), 3)

    @classmethod
    def get_defaults(cls) -> Dict[str, Any]:
        """Get default values for the model. Override in subclasses."""
        return {}

    @classmethod
    def build(cls, **kwargs: Any) -> T:
        """Build a validated model instance."""
        if cls.model is None:
            raise NotImplementedError("model attribute must be set")

        # Merge defaults with provided kwargs
        defaults = cls.get_defaults()
        defaults.update(kwargs)
        return cls.model(**defaults)

    @classmethod
    def build_batch(cls, count: int, **kwargs: Any) -> list[T]:
        """Build multiple instances."""
        return [cls.build(**kwargs) for _ in range(count)]
