# writes asks without waiting for tells and never stops on its own
import json
import sys

init = json.loads(sys.stdin.readline())
msg = json.dumps({"type": "ask", "x": [0.5] * init["dim"]}) + "\n"
try:
    while True:
        sys.stdout.write(msg * 50)
        sys.stdout.flush()
except BrokenPipeError:
    pass
