import math
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt


class BoundingFunction(BaseModel):
    """
    Per-step reconfiguration budget as a function of the network size.

    Attributes
    ----------
    kind : str
        One of ``constant``, ``identity``, ``linear``, ``floor_sqrt``,
        ``floor_log2``
    a, b : int
        Parameters of ``constant`` (``a``) and ``linear`` (``a*n + b``)
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["constant", "identity", "linear", "floor_sqrt", "floor_log2"]
    a: int = 0
    b: int = 0

    def __call__(self, n: int) -> int:
        if self.kind == "constant":
            value = self.a
        elif self.kind == "identity":
            value = n
        elif self.kind == "linear":
            value = self.a * n + self.b
        elif self.kind == "floor_sqrt":
            value = math.isqrt(n) if n > 0 else 0
        else:
            value = n.bit_length() - 1 if n > 0 else 0
        return max(value, 0)

    @property
    def diverging(self) -> bool:
        if self.kind == "constant":
            return False
        if self.kind == "linear":
            return self.a > 0
        return True

    def __str__(self) -> str:
        if self.kind == "constant":
            return f"constant:{self.a}"
        if self.kind == "linear":
            return f"linear:{self.a},{self.b}"
        return self.kind


def parse_bounding_function(text: str) -> BoundingFunction:
    """
    ``identity``/``id``, ``floor_sqrt``/``sqrt``, ``floor_log2``/``log2``,
    ``constant:K`` or ``linear:A,B``.
    """
    name, _, args = text.strip().partition(":")
    name = {"id": "identity", "sqrt": "floor_sqrt", "log2": "floor_log2", "const": "constant"}.get(
        name, name
    )
    if name == "constant":
        return BoundingFunction(kind="constant", a=int(args))
    if name == "linear":
        a, _, b = args.partition(",")
        return BoundingFunction(kind="linear", a=int(a), b=int(b or 0))
    if args:
        raise ValueError(f"{name} takes no parameters")
    return BoundingFunction(kind=name)


class Unconstrained(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["unconstrained"] = "unconstrained"

    def __str__(self) -> str:
        return "unconstrained"


class KConstrained(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["k"] = "k"
    k: PositiveInt

    def __str__(self) -> str:
        return f"k={self.k}"


class StronglyKConstrained(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["strong"] = "strong"
    k: PositiveInt

    def __str__(self) -> str:
        return f"strong={self.k}"


class KBalanced(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["balanced"] = "balanced"
    k: PositiveInt

    def __str__(self) -> str:
        return f"balanced={self.k}"


class KLocallyConstrained(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["local"] = "local"
    k: PositiveInt

    def __str__(self) -> str:
        return f"local={self.k}"


class FConstrained(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["f"] = "f"
    f: BoundingFunction

    def __str__(self) -> str:
        return f"f={self.f}"


Regime = Annotated[
    Union[
        Unconstrained,
        KConstrained,
        StronglyKConstrained,
        KBalanced,
        KLocallyConstrained,
        FConstrained,
    ],
    Field(discriminator="kind"),
]


class ConstraintPolicy(BaseModel):
    """
    Reconfiguration regime plus optional topology bounds.

    Example:
    .. code-block:: python

        policy = ConstraintPolicy(regime=KConstrained(k=1), degree_bound=1)
    """

    model_config = ConfigDict(frozen=True)

    regime: Regime = Unconstrained()
    degree_bound: Optional[Annotated[int, Field(ge=0)]] = None
    path_bound: Optional[Annotated[int, Field(ge=0)]] = None

    @property
    def has_topology(self) -> bool:
        return self.degree_bound is not None or self.path_bound is not None

    def step_budget(self, n: int) -> Optional[int]:
        """Largest number of links one step may change, ``None`` if not bounded per step."""
        regime = self.regime
        if isinstance(regime, (KConstrained, StronglyKConstrained)):
            return regime.k
        if isinstance(regime, FConstrained):
            return regime.f(n)
        return None

    def __str__(self) -> str:
        text = str(self.regime)
        if self.degree_bound is not None:
            text += f" degree<={self.degree_bound}"
        if self.path_bound is not None:
            text += f" path<={self.path_bound}"
        return text


def parse_policy(
    text: str, degree_bound: Optional[int] = None, path_bound: Optional[int] = None
) -> ConstraintPolicy:
    """
    Reads the command line spelling of a policy: ``unconstrained``, ``k=N``,
    ``strong=N``, ``balanced=N``, ``local=N`` or ``f=<function>``.

    :raises ValueError: on anything else
    """
    name, _, value = text.strip().partition("=")
    if name == "unconstrained" and not value:
        regime = Unconstrained()
    elif name == "k":
        regime = KConstrained(k=int(value))
    elif name == "strong":
        regime = StronglyKConstrained(k=int(value))
    elif name == "balanced":
        regime = KBalanced(k=int(value))
    elif name == "local":
        regime = KLocallyConstrained(k=int(value))
    elif name == "f":
        regime = FConstrained(f=parse_bounding_function(value))
    else:
        raise ValueError(f"unknown policy {text!r}")
    return ConstraintPolicy(regime=regime, degree_bound=degree_bound, path_bound=path_bound)
