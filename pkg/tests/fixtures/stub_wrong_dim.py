# two valid asks, then a 3-vector regardless of the problem dimension
import json
import sys

init = json.loads(sys.stdin.readline())
for _ in range(2):
    print(json.dumps({"type": "ask", "x": [1.0] * init["dim"]}), flush=True)
    sys.stdin.readline()
print(json.dumps({"type": "ask", "x": [1.0, 2.0, 3.0]}), flush=True)
sys.stdin.readline()
