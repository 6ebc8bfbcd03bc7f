"""memqsim: a deterministic discrete-event simulator of server memory systems.

Models a DDR5 memory channel (controller queue, bank timing, FR-FCFS
scheduling) and CXL-attached alternatives (serial links with per-direction
goodput and fixed port delays), and quantifies how controller queuing
dominates loaded memory access latency.
"""

__version__ = "0.1.0"

TOOL_NAME = "memqsim"
