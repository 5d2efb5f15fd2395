from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Dict, Mapping, Optional


class ConfigError(Exception):
    """설정 값 에러"""
    pass


class BudgetExceededError(Exception):
    """곱 트리 크기 예산 초과 에러"""
    pass


BUDGET_ENV_VAR = "MTC_BUDGET_VERTICES"


@dataclass(frozen=True)
class Config:
    budget_vertices: int = 2_000_000
    max_depth: int = 12
    exact_downset_cap: int = 20
    exact_subset_cap: int = 18
    exact_cell_cap: int = 16
    rel_tol: float = 1e-9
    abs_floor: float = 1e-12
    identity_tol: float = 1e-12
    power_tol: float = 1e-10
    power_max_iter: int = 100_000
    matrix_free_threshold: int = 4000
    capacity_tol: float = 1e-8
    float_digits: int = 17
    dk_constant: float = 16.0
    reverse_constant: float = 10.0
    suite_trials: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.budget_vertices <= 0:
            raise ConfigError(f"budget_vertices 는 양수여야 합니다: {self.budget_vertices}")
        if not self.suite_trials:
            object.__setattr__(
                self,
                "suite_trials",
                {
                    "identities": 1000,
                    "inequalities": 1000,
                    "constants": 200,
                    "capacity": 100,
                    "majorization": 500,
                    "maxprinciple": 200,
                    "lattice": 100_000,
                    "search": 1000,
                },
            )

    def with_budget(self, budget_vertices: int) -> "Config":
        """예산만 바꾼 새 Config 를 반환합니다."""
        return replace(self, budget_vertices=budget_vertices)


DEFAULT_CONFIG = Config()


def load_config(environ: Optional[Mapping[str, str]] = None) -> Config:
    """
    환경 변수에서 설정을 읽어옵니다.

    Args:
        environ: 환경 변수 매핑 (None 이면 os.environ)

    Returns:
        MTC_BUDGET_VERTICES 가 반영된 Config

    Raises:
        ConfigError: 값이 양의 정수가 아닐 때
    """
    env = os.environ if environ is None else environ
    raw = env.get(BUDGET_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_CONFIG
    try:
        budget = int(float(raw))
    except ValueError as e:
        raise ConfigError(f"{BUDGET_ENV_VAR} 값이 올바르지 않습니다: {raw!r}") from e
    if budget <= 0:
        raise ConfigError(f"{BUDGET_ENV_VAR} 는 양수여야 합니다: {raw!r}")
    return DEFAULT_CONFIG.with_budget(budget)


def check_budget(size: int, config: Config = DEFAULT_CONFIG, what: str = "곱 트리") -> None:
    """크기가 예산을 넘으면 BudgetExceededError 를 발생시킵니다."""
    if size > config.budget_vertices:
        raise BudgetExceededError(
            f"{what} 크기 {size} 가 예산 {config.budget_vertices} 를 초과합니다 ({BUDGET_ENV_VAR})"
        )
