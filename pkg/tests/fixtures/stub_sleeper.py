# reads init and then hangs
import sys
import time

sys.stdin.readline()
time.sleep(60)
