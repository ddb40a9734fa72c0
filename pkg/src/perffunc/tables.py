"""Published AMUE coefficients for eight languages at two pivot sizes.

Zero-shot performance ``a_zs`` was not tabulated, so callers supply it.
"""

from __future__ import annotations

from .core import AmueParams

# (a_t, alpha_t, a_m, alpha_m) keyed by pivot size, then language
PUBLISHED_COEFFICIENTS: dict[int, dict[str, tuple[float, float, float, float]]] = {
    3696: {
        "ar": (3.7e-01, 1.9e-07, 2.0e00, 2.2e-01),
        "bn": (5.8e-04, 6.9e-01, 2.3e00, 3.0e-01),
        "fi": (7.4e-02, 3.9e-01, 1.2e00, 3.0e-01),
        "id": (2.5e-13, 2.5e-01, 1.2e00, 2.9e-01),
        "ko": (2.6e-15, 2.1e-03, 1.5e00, 2.6e-01),
        "ru": (7.8e-13, 5.6e-01, 7.1e-01, 3.5e-01),
        "sw": (5.2e-02, 4.2e-01, 1.1e00, 3.7e-01),
        "te": (5.1e-19, 2.5e-01, 1.2e01, 1.5e-01),
    },
    2000: {
        "ar": (1.7e-01, 2.9e-01, 2.9e00, 2.1e-01),
        "bn": (9.9e-01, 1.2e-01, 1.9e00, 3.4e-01),
        "fi": (9.4e-02, 4.6e-01, 1.6e00, 3.0e-01),
        "id": (4.0e-01, 1.2e-01, 1.5e00, 3.0e-01),
        "ko": (3.0e-13, 4.1e-01, 1.6e00, 2.8e-01),
        "ru": (5.8e-03, 6.5e-01, 1.1e00, 3.4e-01),
        "sw": (9.2e-02, 4.3e-01, 1.2e00, 3.7e-01),
        "te": (1.6e-01, 3.0e-01, 1.2e01, 1.5e-01),
    },
}

LANGUAGES = ("ar", "bn", "fi", "id", "ko", "ru", "sw", "te")


def published_params(language: str, pivot_size: int = 3696, a_zs: float = 0.0) -> AmueParams:
    """AMUE parameters for ``language`` at ``pivot_size`` with the given zero-shot level."""
    try:
        a_t, alpha_t, a_m, alpha_m = PUBLISHED_COEFFICIENTS[int(pivot_size)][language]
    except KeyError:
        raise KeyError(f"no published coefficients for ({language!r}, {pivot_size!r})") from None
    return AmueParams(a_zs=a_zs, a_t=a_t, alpha_t=alpha_t, a_m=a_m, alpha_m=alpha_m)
