import math

import pytest

from mtc.config import BUDGET_ENV_VAR, BudgetExceededError, Config, ConfigError, check_budget, load_config
from mtc.utils.numeric import close, leq, safe_ratio, wilson_interval
from mtc.utils.seeds import SUITE_CODES, derive_seed, trial_rng


class TestConfig:
    def test_defaults(self):
        config = load_config({})
        assert config.budget_vertices == 2_000_000
        assert config.suite_trials["lattice"] == 100_000

    def test_budget_from_env(self):
        config = load_config({BUDGET_ENV_VAR: "5000"})
        assert config.budget_vertices == 5000

    @pytest.mark.parametrize("raw", ["abc", "-3", "0"])
    def test_bad_budget(self, raw):
        with pytest.raises(ConfigError):
            load_config({BUDGET_ENV_VAR: raw})

    def test_check_budget(self):
        check_budget(10, Config(budget_vertices=10))
        with pytest.raises(BudgetExceededError):
            check_budget(11, Config(budget_vertices=10))


class TestNumeric:
    def test_safe_ratio(self):
        assert math.isnan(safe_ratio(0.0, 0.0))
        assert safe_ratio(1.0, 0.0) == math.inf
        assert safe_ratio(3.0, 2.0) == 1.5

    def test_tolerant_comparisons(self):
        assert leq(1.0 + 1e-12, 1.0)
        assert not leq(1.001, 1.0)
        assert close(4.0, 4.0 * (1 + 1e-11))

    def test_wilson_contains_point_estimate(self):
        low, high = wilson_interval(90, 100)
        assert low < 0.9 < high


class TestSeeds:
    def test_derive_is_deterministic(self):
        assert derive_seed(7, SUITE_CODES["lattice"], 3) == derive_seed(7, SUITE_CODES["lattice"], 3)
        assert derive_seed(7, 1, 3) != derive_seed(7, 1, 4)

    def test_trial_rng_reproducible(self):
        a = trial_rng(0, 2, 5).random(4)
        b = trial_rng(0, 2, 5).random(4)
        assert (a == b).all()
