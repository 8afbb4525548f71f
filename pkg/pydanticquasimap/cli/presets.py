import re
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from pydanticquasimap.base_models import ConfigError
from pydanticquasimap.gitdata.models import GitPresentation


def _unit(i: int, r: int) -> Tuple[int, ...]:
    return tuple(int(i == j) for j in range(r))


def _transposition(i: int, r: int) -> Tuple[Tuple[int, ...], ...]:
    rows = [list(_unit(j, r)) for j in range(r)]
    rows[i], rows[i + 1] = rows[i + 1], rows[i]
    return tuple(tuple(row) for row in rows)


def with_equivariant_column(presentation: GitPresentation, s_weights: Optional[Sequence[int]] = None) -> GitPresentation:
    """
    Add one auxiliary torus acting on coordinate l with weight s_weights[l],
    by default l
    """
    if presentation.q:
        return presentation
    s_weights = list(range(presentation.n)) if s_weights is None else list(s_weights)
    if len(s_weights) != presentation.n:
        raise ConfigError(f"expected {presentation.n} equivariant weights, got {len(s_weights)}", field="equivariant")
    return presentation.copy(
        update=dict(
            weights=tuple(w + (s,) for w, s in zip(presentation.weights, s_weights)),
            e_weights=tuple(e + (0,) for e in presentation.e_weights),
            equivariant_rank=1,
        )
    )


def projective_space(n: int, equivariant: bool = False) -> GitPresentation:
    P = GitPresentation(torus_rank=1, weights=((1,),) * (n + 1), theta=(1,))
    return with_equivariant_column(P) if equivariant else P


def weighted_projective(*weights: int, equivariant: bool = False) -> GitPresentation:
    P = GitPresentation(torus_rank=1, weights=tuple((w,) for w in weights), theta=(1,))
    return with_equivariant_column(P) if equivariant else P


def product_projective(*dimensions: int, equivariant: bool = False) -> GitPresentation:
    r = len(dimensions)
    weights = tuple(_unit(i, r) for i, n in enumerate(dimensions) for _ in range(n + 1))
    P = GitPresentation(torus_rank=r, weights=weights, theta=(1,) * r)
    return with_equivariant_column(P) if equivariant else P


def grassmannian(k: int, n: int, equivariant: bool = False) -> GitPresentation:
    """
    Gr(k, n) as k x n matrices modulo GL(k); coordinate (i, j) has weight e_i
    """
    weights = tuple(_unit(i, k) for i in range(k) for _ in range(n))
    roots = []  # type: List[Tuple[int, ...]]
    positive = []  # type: List[int]
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            if i < j:
                positive.append(len(roots))
            roots.append(tuple(_unit(i, k)[m] - _unit(j, k)[m] for m in range(k)))
    P = GitPresentation(
        torus_rank=k,
        weights=weights,
        theta=(1,) * k,
        roots=tuple(roots),
        positive_roots=tuple(positive),
        weyl_generators=tuple(_transposition(i, k) for i in range(k - 1)),
        chi_g_basis=((1,) * k,),
    )
    if equivariant:
        # the auxiliary torus scales the columns of the matrix
        return with_equivariant_column(P, [j for _ in range(k) for j in range(n)])
    return P


def complete_intersection(base: GitPresentation, *degrees: Union[int, Sequence[int]]) -> GitPresentation:
    """
    Cut `base` by sections of the line bundles with characters d * theta,
    or by explicit characters
    """
    e_weights = []
    for degree in degrees:
        if isinstance(degree, int):
            character = tuple(degree * x for x in base.theta)
        else:
            character = tuple(degree)
        e_weights.append(character + (0,) * (base.r + base.q - len(character)))
    return base.copy(update=dict(e_weights=base.e_weights + tuple(e_weights)))


def quintic(equivariant: bool = False) -> GitPresentation:
    return complete_intersection(projective_space(4, equivariant=equivariant), 5)


PRESETS = {
    "projective_space": projective_space,
    "weighted_projective": weighted_projective,
    "product_projective": product_projective,
    "grassmannian": grassmannian,
    "quintic": quintic,
}  # type: Dict[str, Callable[..., GitPresentation]]

PRESET_PATTERN = re.compile(r"^\s*(?P<name>\w+)\s*\((?P<args>[^()]*)\)\s*$")


def preset_from_text(text: str, equivariant: bool = False) -> GitPresentation:
    """
    Read `name(a, b, ...)` with integer arguments
    """
    match = PRESET_PATTERN.match(text)
    if not match or match.group("name") not in PRESETS:
        raise ConfigError(f"unknown preset {text!r}, expected one of {sorted(PRESETS)}", field="presentation.preset")
    try:
        args = [int(part) for part in match.group("args").split(",") if part.strip()]
    except ValueError as E:
        raise ConfigError(f"preset arguments must be integers: {text!r}", field="presentation.preset") from E
    try:
        return PRESETS[match.group("name")](*args, equivariant=equivariant)
    except (TypeError, ValueError) as E:
        raise ConfigError(str(E), field="presentation.preset") from E
