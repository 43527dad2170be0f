"""Reference models written independently of the package, used as test oracles.

Each one follows the textbook description of the mechanism as directly as
possible (time stepping, rational arithmetic, the classic round-robin
loop) rather than the event-driven form used by the simulator.
"""

from collections import deque
from fractions import Fraction

NS = 10**9


def cbs_stepping(arrivals, idle_slope, link_rate=100_000_000, end=None):
    """Two-queue port (CBS high priority, plain best effort) stepped one byte time at a time.

    ``arrivals`` holds (time_ns, "hp" | "be", size_bytes); times must be
    multiples of the byte time and slopes must give whole bits per step.
    Returns (credit_at, schedule): credit in bits at every step boundary,
    after that instant's transmissions, resets and selection; schedule lists
    (start_ns, end_ns, "hp" | "be", size) in start order.
    """
    step = 8 * NS // link_rate
    assert step * link_rate == 8 * NS
    up = idle_slope * step
    down = (idle_slope - link_rate) * step
    assert up % NS == 0 and down % NS == 0, "slopes must give whole bits per step"
    up //= NS
    down //= NS
    pending = sorted(arrivals, key=lambda a: a[0])
    for t, _, _ in pending:
        assert t % step == 0
    queues = {"hp": deque(), "be": deque()}
    credit = 0
    busy = None  # (end, which)
    schedule = []
    credit_at = {}
    if end is None:
        total = sum(s for _, _, s in pending)
        end = (pending[-1][0] if pending else 0) + total * step * 4 + 10 * step
    k = 0
    t = 0
    while t <= end:
        if busy and busy[0] == t:
            if busy[1] == "hp" and not queues["hp"] and credit > 0:
                credit = 0
            busy = None
        while k < len(pending) and pending[k][0] == t:
            queues[pending[k][1]].append(pending[k][2])
            k += 1
        if busy is None:
            if queues["hp"] and credit >= 0:
                which = "hp"
            elif queues["be"]:
                which = "be"
            else:
                which = None
            if which:
                size = queues[which].popleft()
                busy = (t + size * step, which)
                schedule.append((t, busy[0], which, size))
        credit_at[t] = credit
        # slope over [t, t + step)
        if busy and busy[1] == "hp":
            credit += down
        elif queues["hp"]:
            credit += up
        elif credit < 0:
            credit = min(0, credit + up)
        else:
            credit = 0
        t += step
    return credit_at, schedule


def ats_qcr(frames, cir, cbs):
    """Eligibility times of one flow's frames, following the standard's rational-time rules.

    ``frames`` holds (arrival_ns, length_bits) in arrival order. The bucket
    starts full. Returns exact Fractions of ns.
    """
    cir_per_ns = Fraction(cir, NS)
    empty_to_full = Fraction(cbs) / cir_per_ns
    bucket_empty = -empty_to_full
    group = Fraction(-10**18)
    out = []
    for arrival, length in frames:
        recovery = Fraction(length) / cir_per_ns
        scheduler = bucket_empty + recovery
        full_at = bucket_empty + empty_to_full
        elig = max(Fraction(arrival), group, scheduler)
        group = elig
        if elig < full_at:
            bucket_empty = scheduler
        else:
            bucket_empty = scheduler + elig - full_at
        out.append(elig)
    return out


def ats_stepping(frames, cir, cbs):
    """Same eligibility times found by advancing the bucket one ns at a time (integer ns semantics)."""
    cap = cbs * NS
    tokens = cap
    t = 0
    out = []
    prev = 0
    for arrival, length in frames:
        need = length * NS
        start = max(arrival, prev)
        while t < start:
            tokens = min(cap, tokens + cir)
            t += 1
        while tokens < need:
            tokens = min(cap, tokens + cir)
            t += 1
        tokens -= need
        out.append(t)
        prev = t
    return out


def drr_classic(backlogs, quanta):
    """Transmission order of the classic deficit round robin on static backlogs.

    ``backlogs`` is an ordered mapping queue -> list of frame sizes (ring order
    is the mapping order); ``quanta`` maps queue -> quantum in the same unit.
    Returns a list of (queue, index within queue).
    """
    queues = {q: deque(enumerate(sizes)) for q, sizes in backlogs.items()}
    active = deque(q for q in backlogs if queues[q])
    deficit = {q: 0 for q in backlogs}
    order = []
    while active:
        q = active.popleft()
        deficit[q] += quanta[q]
        while queues[q] and queues[q][0][1] <= deficit[q]:
            i, size = queues[q].popleft()
            deficit[q] -= size
            order.append((q, i))
        if queues[q]:
            active.append(q)
        else:
            deficit[q] = 0
    return order


def sp_static(backlogs):
    """Strict priority on static backlogs: higher queue id first, FIFO within a queue."""
    return [(q, i) for q in sorted(backlogs, reverse=True) for i in range(len(backlogs[q]))]
