"""
Method templates - Standard tuned first-order methods for a quadratic class Q_{m,L}
"""
from typing import Callable, Dict, List, Optional, Any
import math

from ..core.method_spec import FunctionClass, MethodSpec


def _complement(values: List[float]) -> List[float]:
    """Append the entry that makes the list sum to one in floating point."""
    return values + [1.0 - math.fsum(values)]


class MethodTemplates:
    """Factories for the fixed-parameter methods with one momentum term (k=1, l=0)."""

    @staticmethod
    def create_gradient_descent(fc: FunctionClass) -> MethodSpec:
        """
        Fixed-step gradient descent with the step 2/(m+L).

        Args:
            fc: Function class (m, L)

        Returns:
            MethodSpec with alpha = [2/(m+L)], beta = [0], gamma = [1, 0]
        """
        return MethodSpec(
            k=1, l=0,
            alpha=[2.0 / (fc.m + fc.L)],
            beta=[0.0],
            gamma=_complement([1.0]),
            name="gradient-descent",
        )

    @staticmethod
    def create_heavy_ball(fc: FunctionClass) -> MethodSpec:
        """
        Polyak's heavy-ball method with the tuning that attains rho*.

        Args:
            fc: Function class (m, L)

        Returns:
            MethodSpec with alpha = [4/(sqrt(L)+sqrt(m))^2], beta = [rho*^2], gamma = [1, 0]
        """
        from ..core.gain_margin import rho_star

        root_sum = math.sqrt(fc.L) + math.sqrt(fc.m)
        return MethodSpec(
            k=1, l=0,
            alpha=[4.0 / root_sum ** 2],
            beta=[rho_star(fc) ** 2],
            gamma=_complement([1.0]),
            name="heavy-ball",
        )

    @staticmethod
    def create_nesterov(fc: FunctionClass) -> MethodSpec:
        """
        Nesterov's constant-step accelerated method for strongly convex functions.

        The gradient is taken at the extrapolated point y_t = (1+beta) x_t - beta x_{t-1}.

        Args:
            fc: Function class (m, L)

        Returns:
            MethodSpec with alpha = [1/L], beta = [(1-q)/(1+q)], gamma = [1+beta, -beta], q = sqrt(m/L)
        """
        q = math.sqrt(fc.m / fc.L)
        beta = (1.0 - q) / (1.0 + q)
        return MethodSpec(
            k=1, l=0,
            alpha=[1.0 / fc.L],
            beta=[beta],
            gamma=_complement([1.0 + beta]),
            name="nesterov",
        )

    @staticmethod
    def create_triple_momentum(fc: FunctionClass) -> MethodSpec:
        """
        Triple momentum method.

        Uses rho = 1 - sqrt(m/L), alpha = (1+rho)/L, beta = rho^2/(2-rho) and the
        gradient point y_t = (1+delta) x_t - delta x_{t-1} with
        delta = rho^2/((1+rho)(2-rho)). The tuning is external to
        the rate analysis; its worst-case rate is computed, never assumed.

        Args:
            fc: Function class (m, L)

        Returns:
            MethodSpec of the triple momentum method
        """
        rho = 1.0 - math.sqrt(fc.m / fc.L)
        delta = rho ** 2 / ((1.0 + rho) * (2.0 - rho))
        return MethodSpec(
            k=1, l=0,
            alpha=[(1.0 + rho) / fc.L],
            beta=[rho ** 2 / (2.0 - rho)],
            gamma=_complement([1.0 + delta]),
            name="triple-momentum",
        )


class PresetLibrary:
    """Library of named, tuned methods."""

    PRESETS: Dict[str, Callable[[FunctionClass], MethodSpec]] = {
        "gradient-descent": MethodTemplates.create_gradient_descent,
        "heavy-ball": MethodTemplates.create_heavy_ball,
        "nesterov": MethodTemplates.create_nesterov,
        "triple-momentum": MethodTemplates.create_triple_momentum,
    }

    # Presets whose tuning is taken from outside the rate analysis itself
    EXTERNAL = {"triple-momentum"}

    @classmethod
    def list_presets(cls) -> List[str]:
        """List available presets."""
        return list(cls.PRESETS.keys())

    @classmethod
    def get_preset(cls, name: str) -> Optional[Callable[[FunctionClass], MethodSpec]]:
        """Get preset factory by name."""
        return cls.PRESETS.get(name)

    @classmethod
    def create(cls, name: str, fc: FunctionClass) -> MethodSpec:
        factory = cls.get_preset(name)
        if factory is None:
            raise KeyError(f"Unknown preset {name!r}; available: {', '.join(cls.list_presets())}")
        return factory(fc)

    @classmethod
    def get_preset_info(cls, name: str) -> Dict[str, Any]:
        """Get preset information."""
        factory = cls.get_preset(name)
        if factory:
            doc = (factory.__doc__ or "").strip()
            return {
                "name": name,
                "description": doc.split("\n")[0] if doc else "",
                "external": name in cls.EXTERNAL,
                "function": factory,
            }
        return {}

    @classmethod
    def print_preset_list(cls) -> None:
        """Print all available presets."""
        print("Available method presets:")
        print("-" * 50)
        for name in cls.list_presets():
            info = cls.get_preset_info(name)
            marker = " *" if info["external"] else ""
            print(f"  {name:20s} - {info['description']}{marker}")
