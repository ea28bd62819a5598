"""Reference external candidate: uniform random search over the ask-tell wire protocol.

Reads JSON lines on stdin, writes JSON lines on stdout. Standard library only.
"""
import json
import random
import sys


def main():
    init = json.loads(sys.stdin.readline())
    rng = random.Random(init["seed"])
    lower, upper = init["lower"], init["upper"]
    while True:
        x = [rng.uniform(lo, hi) for lo, hi in zip(lower, upper)]
        sys.stdout.write(json.dumps({"type": "ask", "x": x}) + "\n")
        sys.stdout.flush()
        line = sys.stdin.readline()
        if not line:
            return
        msg = json.loads(line)
        if msg["type"] == "stop":
            return


if __name__ == "__main__":
    main()
