# asks three valid points, then writes bytes that are not JSON
import json
import sys

init = json.loads(sys.stdin.readline())
for _ in range(3):
    print(json.dumps({"type": "ask", "x": [0.0] * init["dim"]}), flush=True)
    sys.stdin.readline()
sys.stdout.write("\x00\x01 not json at all {{{\n")
sys.stdout.flush()
sys.stdin.readline()
