# MIT License
#
# Copyright (c) 2024 The fastswitch developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.


import requests
import pytest

from fastswitch.adapters import AdapterResponse, AdapterRole, MockAdapterServer, OracleBackend, RemoteBackend
from fastswitch.adapters.backends import Backend
from fastswitch.core import Query
from fastswitch.core.serialization import canonical_dumps
from fastswitch.pipeline import QueryTrace, run_batch, run_query
from fastswitch.utils import BackendError, ConfigError, ProtocolError, TransportError, UnsupportedQuestionError

from conftest import corpus, desk_backend, desk_query, fixture_backend_for


def _dump(records):
    return canonical_dumps([r.to_dict() for r in records])


def test_transport_transparency():

    data = corpus()
    queries = data.queries[:50]
    fixtures = fixture_backend_for(queries, data.scenes)

    local = run_batch(queries, fixtures, labels=data.labels, no_timestamps=True)

    with MockAdapterServer(fixtures) as server:
        remote = RemoteBackend(server.endpoint, timeout=10)
        try:
            served = run_batch(queries, remote, labels=data.labels, no_timestamps=True, parallelism=4)

            for q in queries[:10]:
                local_trace = QueryTrace(q)
                remote_trace = QueryTrace(q)
                run_query(q, fixtures, trace=local_trace)
                run_query(q, remote, trace=remote_trace)
                assert canonical_dumps(local_trace.to_dict(no_timestamps=True)) == \
                    canonical_dumps(remote_trace.to_dict(no_timestamps=True))
        finally:
            remote.close()

    assert _dump(local) == _dump(served)
    assert all(not r.failed for r in served)


def test_oracle_over_http():

    data = corpus()
    queries = data.queries[:30]
    oracle = OracleBackend(data.scenes)

    local = run_batch(queries, oracle, labels=data.labels, no_timestamps=True)

    with MockAdapterServer(oracle) as server:
        with RemoteBackend(server.endpoint) as remote:
            served = run_batch(queries, remote, labels=data.labels, no_timestamps=True, parallelism=8)

    assert _dump(local) == _dump(served)


def test_unreachable_endpoint():

    backend = RemoteBackend("http://127.0.0.1:1", timeout=1, retries=0)

    with pytest.raises(TransportError) as e:
        run_query(desk_query("What color is the cup?"), backend)

    assert e.value.step == "switch"
    assert e.value.retryable

    records = run_batch([desk_query("What color is the cup?")], backend)
    assert records[0].failed
    assert records[0].failed_step == "switch"


class WrongRoleBackend(Backend):

    name = "wrong-role"

    def _call(self, request):
        return AdapterResponse(AdapterRole.SUMMARIZE, raw_text="blue")


def test_error_kinds():

    with MockAdapterServer(desk_backend()) as server:
        with RemoteBackend(server.endpoint, retries=0) as remote:

            with pytest.raises(UnsupportedQuestionError) as e:
                run_query(desk_query("How many cups are there?"), remote)
            assert e.value.step == "switch"

            with pytest.raises(BackendError) as e:
                run_query(Query("nowhere", "What color is the cup?", "q1"), remote)
            assert not isinstance(e.value, UnsupportedQuestionError)

    with MockAdapterServer(WrongRoleBackend()) as server:
        with RemoteBackend(server.endpoint, retries=0) as remote:
            with pytest.raises(ProtocolError) as e:
                run_query(desk_query("What color is the cup?"), remote)
            assert e.value.step == "switch"


def test_http_errors():

    with MockAdapterServer(desk_backend()) as server:

        response = requests.post(server.endpoint + "/v2/adapter", data=b"{}", timeout=5)
        assert response.status_code == 404
        assert response.json()["kind"] == "protocol"

        response = requests.get(server.endpoint + "/v1/adapter", timeout=5)
        assert response.status_code == 405

        response = requests.post(server.endpoint + "/v1/adapter", data=b"{not json", timeout=5)
        assert response.status_code == 400
        assert response.json()["kind"] == "protocol"

        response = requests.post(server.endpoint + "/v1/adapter", data=b'{"role": "switch"}', timeout=5)
        assert response.status_code == 400
        assert "query" in response.json()["error"]


def test_remote_config():

    for endpoint in (None, "", "ftp://127.0.0.1", "127.0.0.1:8080"):
        with pytest.raises(ConfigError):
            RemoteBackend(endpoint)
    with pytest.raises(ConfigError):
        RemoteBackend("http://127.0.0.1:8080", timeout=0)
    with pytest.raises(ConfigError):
        RemoteBackend("http://127.0.0.1:8080", retries=-1)

    backend = RemoteBackend("http://127.0.0.1:8080/")
    assert backend.url == "http://127.0.0.1:8080/v1/adapter"


if __name__ == "__main__":

    test_transport_transparency()
    test_oracle_over_http()
    test_unreachable_endpoint()
    test_error_kinds()
    test_http_errors()
    test_remote_config()
