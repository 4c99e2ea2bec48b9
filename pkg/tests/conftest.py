import pytest

from newsdowngrade.synthgen import GeneratorConfig, generate, write_bundle

# criterion id -> (passed, detail); filled by the acceptance tests
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'}: {detail}")


SMALL = dict(n_companies=60, n_days=5, downgrade_rate=0.08, seed=11)


@pytest.fixture(scope="session")
def small_config():
    return GeneratorConfig(**SMALL)


@pytest.fixture(scope="session")
def small_bundle(small_config):
    return generate(small_config)


@pytest.fixture(scope="session")
def small_bundle_dir(small_bundle, tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    write_bundle(small_bundle, out)
    return out
