import copy
from pathlib import Path

import pytest

from appease.errors import ScenarioValidationError
from appease.sim import BackgroundHog, PeriodicStream, RequestArrival, load_scenario, parse_scenario, validate_file


@pytest.fixture
def minimal():
    return {
        'policy': {'kind': 'rr', 'quantum_us': 10000},
        'processes': [{'pid': 1}, {'pid': 2}],
        'customers': [{'id': 1}],
        'workload': [{'type': 'request', 'at_us': 0, 'customer': 1,
                      'chain': [{'process': 1, 'cpu_us': 1000}]}],
        'horizon_us': 100000,
    }


def _codes(data, config):
    with pytest.raises(ScenarioValidationError) as info:
        parse_scenario(data, config)
    return [(d.code, d.path) for d in info.value.diagnostics]


def test_load_chain(chain_path, config):
    scenario = load_scenario(chain_path, config)
    assert scenario.id == "chain"
    assert scenario.policy.kind == "fairshare"
    assert scenario.hog_count == 3
    assert scenario.seed == 3
    assert [c.id for c in scenario.customers] == [1, 2]
    assert scenario.customers[1].remote

    hogs, request, stream = scenario.workload
    assert isinstance(hogs, BackgroundHog)
    assert isinstance(request, RequestArrival)
    assert [s.process for s in request.chain] == [1, 2, 1]
    assert isinstance(stream, PeriodicStream)
    assert stream.nominal_arrivals()[:2] == [100000, 140000]
    assert scenario.streams == [stream]
    assert validate_file(chain_path, config) == []


def test_defaults_filled_in(minimal, config):
    scenario = parse_scenario(minimal, config, default_id="minimal")
    assert scenario.id == "minimal"
    assert scenario.model.alpha == 0.0
    assert scenario.workload[0].target == 1
    assert scenario.seed == 0
    assert scenario.series_period_us is None


@pytest.mark.parametrize("filename, code, path", [
    ("bad_alpha.json", 'E104', 'model.alpha'),
    ("dangling.json", 'E105', 'workload[0].chain[1].process'),
    ("cyclic.json", 'E109', 'workload'),
    ("unknown_policy.json", 'E103', 'policy.kind'),
])
def test_file_diagnostics(testdata_path, config, filename, code, path):
    diagnostics = validate_file(testdata_path / filename, config)
    assert [(d.code, d.path) for d in diagnostics] == [(code, path)]


def test_unparsable_file(testdata_path, config):
    diagnostic, = validate_file(testdata_path / "broken.json", config)
    assert diagnostic.code == 'E100'
    assert diagnostic.line == 4
    assert str(diagnostic).startswith("E100 line 4")


def test_all_problems_reported(minimal, config):
    data = copy.deepcopy(minimal)
    del data['horizon_us']
    data['processes'].append({'pid': 2})
    data['workload'][0]['customer'] = 9
    assert _codes(data, config) == [
        ('E108', 'processes[2].pid'),
        ('E106', 'workload[0].customer'),
        ('E101', 'horizon_us'),
    ]


def test_chain_shape(minimal, config):
    data = copy.deepcopy(minimal)
    data['workload'][0]['chain'].append({'process': 2, 'cpu_us': 1000})
    assert _codes(data, config) == [('E107', 'workload[0].chain')]


def test_type_errors(minimal, config):
    data = copy.deepcopy(minimal)
    data['workload'][0]['chain'][0]['cpu_us'] = 0
    data['customers'][0]['weight'] = -1
    data['seed'] = "x"
    assert _codes(data, config) == [
        ('E102', 'customers[0].weight'),
        ('E106', 'workload[0].customer'),
        ('E102', 'workload[0].chain[0].cpu_us'),
        ('E102', 'seed'),
    ]


def test_policy_alpha(minimal, config):
    data = copy.deepcopy(minimal)
    data['policy'] = {'kind': 'appeasement', 'alpha': 0.7}
    assert _codes(data, config) == [('E104', 'policy.alpha')]


def test_not_an_object(config):
    assert _codes([], config) == [('E102', '')]


def test_digest_and_variants(chain_path, config):
    scenario = load_scenario(chain_path, config)
    assert scenario.digest() == load_scenario(chain_path, config).digest()
    assert scenario.with_seed(4).digest() != scenario.digest()

    more = scenario.with_hogs(7)
    assert more.hog_count == 7
    assert len(more.workload) == len(scenario.workload)

    rr = scenario.with_policy("rr", quantum_us=5000)
    assert rr.policy.kind == "rr"
    assert rr.to_dict()['policy'] == {'kind': 'rr', 'quantum_us': 5000}


def test_with_hogs_adds_item(minimal, config):
    scenario = parse_scenario(minimal, config)
    assert scenario.hog_count == 0
    loaded = scenario.with_hogs(2)
    assert loaded.workload[0] == BackgroundHog(0, 2)
    with pytest.raises(ValueError):
        scenario.with_hogs(-1)


@pytest.mark.parametrize("path", sorted((Path(__file__).parents[2] / "scenarios").glob("*.json")),
                         ids=lambda path: path.stem)
def test_shipped_scenarios_validate(path, config):
    assert validate_file(path, config) == []
