import base64
import json
import socket
import subprocess
import sys
import threading

import numpy as np

from oracle_server.model import LinearSoftmaxModel
from oracle_server.server import ServerConfig, TcpOracleServer, handle_line


def encode(x):
    return base64.b64encode(np.asarray(x).astype("<f4").tobytes()).decode()


def request(frame_id, x):
    arr = np.asarray(x)
    return json.dumps({"id": frame_id, "shape": list(arr.shape),
                       "dtype": "f32le", "data": encode(arr)}) + "\n"


class TestModel:
    def test_toy_prototypes_classify_to_their_class(self):
        model = LinearSoftmaxModel.toy(16, 4, seed=0)
        for label in range(4):
            assert model.classify(model.prototype(label)) == label

    def test_toy_is_deterministic(self):
        a = LinearSoftmaxModel.toy(8, 3, seed=5)
        b = LinearSoftmaxModel.toy(8, 3, seed=5)
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.bias, b.bias)

    def test_save_load_round_trip(self, tmp_path):
        model = LinearSoftmaxModel.toy(8, 3, seed=5)
        path = tmp_path / "weights.npz"
        model.save(path)
        loaded = LinearSoftmaxModel.load(path)
        x = np.random.default_rng(0).normal(size=8)
        assert loaded.classify(x) == model.classify(x)


class TestHandleLine:
    def config(self, **kw):
        return ServerConfig(model=LinearSoftmaxModel.toy(6, 3, seed=1), **kw)

    def test_classifies_prototype(self):
        config = self.config()
        reply = handle_line(config, request(5, config.model.prototype(0)))
        assert reply == {"id": 5, "label": 0}

    def test_base64_round_trip_matches_in_process(self):
        config = self.config()
        rng = np.random.default_rng(2)
        for i in range(100):
            x = rng.normal(size=6)
            reply = handle_line(config, request(i, x))
            expected = config.model.classify(x.astype("<f4").astype(np.float64))
            assert reply == {"id": i, "label": expected}

    def test_wrong_length_reports_shape_mismatch(self):
        config = self.config()
        reply = handle_line(config, request(9, np.zeros(7)))
        assert reply["id"] == 9
        assert "shape mismatch" in reply["error"]

    def test_shape_field_inconsistent_with_payload(self):
        config = self.config()
        frame = {"id": 4, "shape": [2, 3], "dtype": "f32le",
                 "data": encode(np.zeros(5))}
        reply = handle_line(config, json.dumps(frame))
        assert reply["id"] == 4
        assert "shape mismatch" in reply["error"]

    def test_unparseable_frame_gets_id_zero(self):
        reply = handle_line(self.config(), "this is not json\n")
        assert reply["id"] == 0
        assert "error" in reply

    def test_bad_dtype_rejected(self):
        frame = {"id": 2, "dtype": "f64le", "data": encode(np.zeros(6))}
        reply = handle_line(self.config(), json.dumps(frame))
        assert reply["id"] == 2
        assert "dtype" in reply["error"]

    def test_bad_base64_rejected(self):
        frame = {"id": 3, "dtype": "f32le", "data": "!!bad!!"}
        reply = handle_line(self.config(), json.dumps(frame))
        assert reply["id"] == 3
        assert "base64" in reply["error"]

    def test_clip_mode_clamps_before_classify(self):
        config = self.config(clip=True)
        x = np.full(6, 3.0)
        reply = handle_line(config, request(1, x))
        assert reply["label"] == config.model.classify(np.ones(6))


class TestTcpServer:
    def start(self, config):
        server = TcpOracleServer(config)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        return server

    def talk(self, port, lines):
        with socket.create_connection(("127.0.0.1", port)) as sock:
            reader = sock.makefile("rb")
            hello = json.loads(reader.readline())
            replies = []
            for line in lines:
                sock.sendall(line.encode())
                replies.append(json.loads(reader.readline()))
            return hello, replies

    def test_handshake_matches_model_metadata(self):
        model = LinearSoftmaxModel.toy(12, 5, seed=3)
        server = self.start(ServerConfig(model=model))
        try:
            hello, _ = self.talk(server.port, [])
            assert hello == {"hello": 1, "n": 12, "classes": 5}
        finally:
            server.shutdown()

    def test_lockstep_requests_and_errors(self):
        model = LinearSoftmaxModel.toy(6, 3, seed=1)
        server = self.start(ServerConfig(model=model))
        try:
            lines = [request(1, model.prototype(1)),
                     "garbage\n",
                     request(2, model.prototype(2))]
            _, replies = self.talk(server.port, lines)
            assert replies[0] == {"id": 1, "label": 1}
            assert replies[1]["id"] == 0 and "error" in replies[1]
            assert replies[2] == {"id": 2, "label": 2}
        finally:
            server.shutdown()

    def test_multiple_connections(self):
        model = LinearSoftmaxModel.toy(6, 3, seed=1)
        server = self.start(ServerConfig(model=model))
        try:
            for _ in range(3):
                _, replies = self.talk(server.port,
                                       [request(7, model.prototype(0))])
                assert replies[0] == {"id": 7, "label": 0}
        finally:
            server.shutdown()


class TestStdioMode:
    def test_subprocess_session(self):
        proc = subprocess.Popen(
            [sys.executable, "-m", "oracle_server.cli", "--toy", "6,3,4",
             "--stdio"],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE)
        try:
            hello = json.loads(proc.stdout.readline())
            assert hello == {"hello": 1, "n": 6, "classes": 3}
            model = LinearSoftmaxModel.toy(6, 3, seed=4)
            rng = np.random.default_rng(0)
            for i in range(20):
                x = rng.normal(size=6)
                proc.stdin.write(request(i, x).encode())
                proc.stdin.flush()
                reply = json.loads(proc.stdout.readline())
                expected = model.classify(x.astype("<f4").astype(np.float64))
                assert reply == {"id": i, "label": expected}
        finally:
            proc.stdin.close()
            proc.wait(timeout=10)

    def test_dump_weights(self, tmp_path):
        path = tmp_path / "w.npz"
        code = subprocess.run(
            [sys.executable, "-m", "oracle_server.cli", "--toy", "6,3,4",
             "--dump-weights", str(path)]).returncode
        assert code == 0
        loaded = LinearSoftmaxModel.load(path)
        assert (loaded.n, loaded.classes) == (6, 3)
