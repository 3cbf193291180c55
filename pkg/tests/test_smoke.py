import netspec
from netspec.config import load_config
from netspec.pipeline import oracle_report
from netspec.fixtures import load_fixture


def test_cfg():
    assert load_config()


def test_version():
    assert netspec.__version__


def test_oracle_smoke():
    report = oracle_report(load_fixture("paper_scenario1").w, load_config(), seed=0)
    assert report["n"] == 6
