import numpy as np

# 스위트별 카운터 코드. 시드 유도에 쓰이므로 값을 바꾸면 안 됩니다.
SUITE_CODES = {
    "identities": 1,
    "inequalities": 2,
    "constants": 3,
    "capacity": 4,
    "majorization": 5,
    "maxprinciple": 6,
    "lattice": 7,
    "search": 8,
}


def derive_seed(master: int, *counters: int) -> int:
    """
    마스터 시드와 카운터들로부터 시행별 시드를 유도합니다.

    SeedSequence([master, *counters]) 의 첫 32비트 상태를 사용하므로
    시행 k 의 결과는 다른 시행의 실행 순서와 무관합니다.
    """
    entropy = [int(master)] + [int(c) for c in counters]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def trial_rng(master: int, *counters: int) -> np.random.Generator:
    """유도된 시드로 Generator 를 생성합니다."""
    return np.random.default_rng(derive_seed(master, *counters))
