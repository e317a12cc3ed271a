"""The complete cell, in process: broker + handler + operator.

Runs one scripted job end to end while a bus tap records the command
transcript, then runs the 5-repeat timing harness and prints the per-step
means (the key-step columns of the planning-time comparison).
"""

import threading
import time

from weldcell.handler import CellConfig, LocalCell
from weldcell.msgbus import BusClient
from weldcell.operator_cli import JobChoices, bench, run_job

with LocalCell(CellConfig()) as cell:
    host, port = cell.address
    print(f"cell up on {host}:{port}")

    # tap the bus to watch the conversation
    tap = BusClient(host, port, client_id="tap").connect()
    tap.subscribe()
    transcript = []
    stop = threading.Event()

    def pump():
        while not stop.is_set():
            try:
                msg = tap.receive(timeout=0.1)
            except Exception:
                return
            if msg is not None:
                transcript.append(msg.command.value)

    pump_thread = threading.Thread(target=pump, daemon=True)
    pump_thread.start()

    choices = JobChoices(structure="U", length_h=600.0, length_v=400.0,
                         weld_scheme=1, weave_scheme=1, simulate=True)
    record, timings = run_job(choices, host, port, log_path="/tmp/jobs.csv")
    time.sleep(0.3)
    stop.set()
    pump_thread.join()
    tap.close()

    print("\ntranscript:")
    for cmd in transcript:
        print(f"  {cmd}")

    print("\njob record:")
    print(f"  welded h/v: {record.horizontal_welded_distance_cm} / "
          f"{record.vertical_welded_distance_cm} cm")
    print(f"  measured max h/v: {record.horizontal_max_size_cm:.2f} / "
          f"{record.vertical_max_size_cm:.2f} cm")
    print(f"  process {record.process_time_s:.3f} s, "
          f"capture {record.capture_time_s:.3f} s")
    print("  appended to /tmp/jobs.csv")

    print("\ntiming harness (5 repeats):")
    result = bench(5, choices, host, port)
    print(result.table_text())
