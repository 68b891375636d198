"""Shared fixtures: bundled scenarios are expensive to build, so they are
constructed once per session and treated as read-only by every test."""

import pytest

from detourkit.matching import match_corpus
from detourkit.network import network_from_geojson
from detourkit.pipeline import run_query
from detourkit.synth import build_scenario, grid_network


@pytest.fixture(scope="session")
def ws_bundle():
    return build_scenario("weigh_station")


@pytest.fixture(scope="session")
def ws_net(ws_bundle):
    return network_from_geojson(ws_bundle.network)


@pytest.fixture(scope="session")
def ws_matched(ws_bundle, ws_net):
    matched, rejected = match_corpus(ws_bundle.trips, ws_net)
    assert not rejected
    return matched


@pytest.fixture(scope="session")
def ws_report(ws_bundle, ws_net, ws_matched):
    return run_query(ws_net, ws_bundle.trips, ws_bundle.queries["main"], matched=ws_matched, rejections=[])


@pytest.fixture(scope="session")
def bt_bundle():
    return build_scenario("bridge_times")


@pytest.fixture(scope="session")
def bt_net(bt_bundle):
    return network_from_geojson(bt_bundle.network)


@pytest.fixture(scope="session")
def bt_reports(bt_bundle, bt_net):
    matched, rejected = match_corpus(bt_bundle.trips, bt_net)
    assert not rejected
    return {
        name: run_query(bt_net, bt_bundle.trips, doc, matched=matched, rejections=[])
        for name, doc in bt_bundle.queries.items()
    }


@pytest.fixture(scope="session")
def cc_bundle():
    return build_scenario("closure_compare")


@pytest.fixture(scope="session")
def cc_net(cc_bundle):
    return network_from_geojson(cc_bundle.network)


@pytest.fixture(scope="session")
def cc_reports(cc_bundle, cc_net):
    matched, rejected = match_corpus(cc_bundle.trips, cc_net)
    assert not rejected
    return {
        name: run_query(cc_net, cc_bundle.trips, doc, matched=matched, rejections=[])
        for name, doc in cc_bundle.queries.items()
    }


@pytest.fixture(scope="session")
def grid5():
    return network_from_geojson(grid_network(5, 5))
