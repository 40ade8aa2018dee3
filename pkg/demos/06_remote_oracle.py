"""Attack a classifier behind the wire protocol.

The toolkit hosts one of its built-in oracles on a local TCP port (the same
NDJSON frames the standalone reference server speaks), connects the
remote-oracle client to it, and runs a budgeted attack through the socket.
Points travel as base64-encoded little-endian float32, so the remote and
in-process labels agree bit for bit at float32 resolution.
"""

import threading

import numpy as np

from cgba import AttackConfig, Indicator, TargetImages, attack
from cgba.bench import build_oracle
from cgba.remote import OracleServer, RemoteOracle

local = build_oracle("halfspace:n=8,seed=4,offset=0.6")
server = OracleServer(build_oracle("halfspace:n=8,seed=4,offset=0.6"))
threading.Thread(target=server.serve_forever, daemon=True).start()
print(f"serving a halfspace oracle on 127.0.0.1:{server.port}")

remote = RemoteOracle.connect_tcp("127.0.0.1", server.port)
print(f"handshake: n={remote.n}, classes={remote.num_classes}")

rng = np.random.default_rng(3)
agree = sum(remote.classify(x) == local.classify(x.astype('<f4').astype(float))
            for x in rng.normal(size=(200, 8)))
print(f"label agreement with the in-process oracle: {agree}/200")

cfg = AttackConfig(variant="cgba", budget=800, rng_seed=0)
trace = attack(np.zeros(8), cfg, remote, Indicator.nontargeted(0),
               TargetImages([local.normal * 3.0]))
print(f"\nremote attack: final distance {trace.final.distance:.6f} "
      f"(optimum 0.6) in {trace.queries_spent} queries, "
      f"{len(trace.records) - 1} iterations")

remote.close()
server.shutdown()
