from typing import Callable

from .exceptions import AlgorithmNotFound


ALGORITHM_REGISTRY: dict[str, Callable] = {}


__all__ = [
    'register_algorithm',
    'get_builder',
]


def register_algorithm(name: str):
    """
    Decorator registering a collector builder under an algorithm name.
    The builder receives (ExperimentConfig) and returns a ready collector.
    """
    def decorator(func: Callable):
        ALGORITHM_REGISTRY[name] = func
        return func

    return decorator


def get_builder(name: str) -> Callable:
    func = ALGORITHM_REGISTRY.get(name, None)

    if func is None:
        available = ", ".join(sorted(ALGORITHM_REGISTRY))
        raise AlgorithmNotFound(f"Algorithm '{name}' doesn't exist. Available: {available}.")

    return func


def available_algorithms() -> list[str]:
    return sorted(ALGORITHM_REGISTRY)
