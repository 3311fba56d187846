"""Write the synthetic NSL-KDD-format fixture used by the test suite.

The records are invented: field layout, symbols and label names follow the
NSL-KDD files, the values are drawn from simple per-attack profiles with
enough overlap that classifiers make mistakes. Output is deterministic.

    python3 scripts/gen_fixture.py > crates/core/fixtures/nslkdd_sample.txt
"""

import random

rng = random.Random(20190101)


def rate(lo, hi):
    return round(rng.uniform(lo, hi), 2)


def base():
    r = {
        "duration": 0, "protocol_type": "tcp", "service": "http", "flag": "SF",
        "src_bytes": 0, "dst_bytes": 0, "land": 0, "wrong_fragment": 0, "urgent": 0,
        "hot": 0, "num_failed_logins": 0, "logged_in": 0, "num_compromised": 0,
        "root_shell": 0, "su_attempted": 0, "num_root": 0, "num_file_creations": 0,
        "num_shells": 0, "num_access_files": 0, "num_outbound_cmds": 0,
        "is_host_login": 0, "is_guest_login": 0, "count": 1, "srv_count": 1,
        "serror_rate": 0.0, "srv_serror_rate": 0.0, "rerror_rate": 0.0,
        "srv_rerror_rate": 0.0, "same_srv_rate": 1.0, "diff_srv_rate": 0.0,
        "srv_diff_host_rate": 0.0, "dst_host_count": 255, "dst_host_srv_count": 255,
        "dst_host_same_srv_rate": 1.0, "dst_host_diff_srv_rate": 0.0,
        "dst_host_same_src_port_rate": 0.0, "dst_host_srv_diff_host_rate": 0.0,
        "dst_host_serror_rate": 0.0, "dst_host_srv_serror_rate": 0.0,
        "dst_host_rerror_rate": 0.0, "dst_host_srv_rerror_rate": 0.0,
    }
    return r


def normal():
    r = base()
    kind = rng.random()
    if kind < 0.55:
        r.update(service="http", src_bytes=rng.randint(150, 400), dst_bytes=rng.randint(300, 9000))
    elif kind < 0.7:
        r.update(protocol_type="udp", service="domain_u", src_bytes=rng.randint(30, 60), dst_bytes=rng.randint(30, 150))
    elif kind < 0.8:
        r.update(service="smtp", src_bytes=rng.randint(500, 2500), dst_bytes=rng.randint(300, 400))
    elif kind < 0.9:
        r.update(service="ftp_data", src_bytes=rng.randint(100, 20000), dst_bytes=0)
    elif kind < 0.95:
        r.update(protocol_type="icmp", service="eco_i", flag="SF", src_bytes=rng.choice([8, 18, 20]))
    else:
        r.update(protocol_type="udp", service="private", src_bytes=rng.randint(40, 110), dst_bytes=rng.randint(40, 110))
    r["logged_in"] = 1 if r["protocol_type"] == "tcp" else 0
    r["duration"] = rng.choice([0] * 8 + [rng.randint(1, 300)])
    r["count"] = rng.randint(1, 30)
    r["srv_count"] = rng.randint(1, 40)
    r["same_srv_rate"] = rate(0.8, 1.0)
    r["diff_srv_rate"] = rate(0.0, 0.1)
    r["srv_diff_host_rate"] = rate(0.0, 0.3)
    r["dst_host_count"] = rng.randint(5, 255)
    r["dst_host_srv_count"] = rng.randint(20, 255)
    r["dst_host_same_srv_rate"] = rate(0.6, 1.0)
    r["dst_host_diff_srv_rate"] = rate(0.0, 0.1)
    r["dst_host_same_src_port_rate"] = rate(0.0, 0.2)
    r["dst_host_srv_diff_host_rate"] = rate(0.0, 0.1)
    if rng.random() < 0.05:
        r["flag"] = rng.choice(["REJ", "RSTO", "S1"])
        r["rerror_rate"] = rate(0.0, 0.3)
    return r, "normal"


def neptune():
    r = base()
    r.update(service=rng.choice(["private", "http", "telnet", "ftp_data", "smtp", "finger"]),
             flag=rng.choice(["S0"] * 6 + ["REJ"]), count=rng.randint(100, 510), srv_count=rng.randint(1, 30),
             dst_host_count=255, dst_host_srv_count=rng.randint(1, 30))
    syn = r["flag"] == "S0"
    r["serror_rate"] = r["srv_serror_rate"] = 1.0 if syn else 0.0
    r["rerror_rate"] = r["srv_rerror_rate"] = 0.0 if syn else 1.0
    r["dst_host_serror_rate"] = r["dst_host_srv_serror_rate"] = 1.0 if syn else 0.0
    r["dst_host_rerror_rate"] = r["dst_host_srv_rerror_rate"] = 0.0 if syn else 1.0
    r["same_srv_rate"] = rate(0.0, 0.1)
    r["diff_srv_rate"] = rate(0.04, 0.08)
    r["dst_host_same_srv_rate"] = rate(0.0, 0.12)
    r["dst_host_diff_srv_rate"] = rate(0.04, 0.08)
    return r, "neptune"


def smurf():
    r = base()
    r.update(protocol_type="icmp", service="ecr_i", src_bytes=rng.choice([520, 1032]), count=rng.randint(300, 511),
             srv_count=rng.randint(300, 511), dst_host_srv_count=255, dst_host_same_src_port_rate=rate(0.5, 1.0))
    return r, "smurf"


def portsweep():
    r = base()
    r.update(service=rng.choice(["private", "other", "ftp_data", "telnet"]), flag=rng.choice(["REJ", "RSTR", "RSTOS0", "SH"]),
             duration=rng.choice([0, 0, rng.randint(1, 20000)]), count=rng.randint(1, 3), srv_count=rng.randint(1, 3),
             rerror_rate=rate(0.5, 1.0), srv_rerror_rate=rate(0.5, 1.0), srv_diff_host_rate=rate(0.0, 1.0),
             dst_host_count=rng.randint(1, 255), dst_host_srv_count=rng.randint(1, 10),
             dst_host_same_srv_rate=rate(0.0, 0.3), dst_host_diff_srv_rate=rate(0.0, 0.2),
             dst_host_same_src_port_rate=rate(0.5, 1.0), dst_host_rerror_rate=rate(0.5, 1.0),
             dst_host_srv_rerror_rate=rate(0.5, 1.0))
    return r, "portsweep"


def satan():
    r = base()
    r.update(service=rng.choice(["private", "other", "telnet", "finger", "domain_u"]), flag=rng.choice(["REJ", "SF", "S0", "RSTO"]),
             count=rng.randint(1, 200), srv_count=rng.randint(1, 10), rerror_rate=rate(0.3, 1.0),
             srv_rerror_rate=rate(0.3, 1.0), same_srv_rate=rate(0.0, 0.3), diff_srv_rate=rate(0.3, 1.0),
             dst_host_count=rng.randint(50, 255), dst_host_srv_count=rng.randint(1, 50),
             dst_host_same_srv_rate=rate(0.0, 0.3), dst_host_diff_srv_rate=rate(0.2, 1.0))
    return r, "satan"


def guess_passwd():
    r = base()
    r.update(service="telnet", duration=rng.randint(0, 5), src_bytes=rng.randint(120, 130), dst_bytes=rng.randint(170, 180),
             num_failed_logins=1, hot=rng.choice([0, 1]), dst_host_count=rng.randint(1, 255),
             dst_host_srv_count=rng.randint(1, 30), dst_host_same_srv_rate=rate(0.1, 1.0))
    return r, "guess_passwd"


def warezclient():
    # close to normal ftp_data traffic on purpose
    r, _ = normal()
    r.update(service=rng.choice(["ftp_data", "ftp"]), protocol_type="tcp", flag="SF", duration=rng.randint(0, 2000),
             src_bytes=rng.randint(200, 40000), dst_bytes=rng.randint(0, 500), hot=rng.randint(0, 28),
             is_guest_login=rng.choice([0, 1]), logged_in=1)
    return r, "warezclient"


def buffer_overflow():
    r = base()
    r.update(service="telnet", duration=rng.randint(10, 300), src_bytes=rng.randint(1000, 3000),
             dst_bytes=rng.randint(2000, 10000), hot=rng.randint(1, 3), logged_in=1, root_shell=1,
             num_file_creations=rng.randint(0, 2), num_shells=rng.choice([0, 1]), dst_host_count=rng.randint(1, 20),
             dst_host_srv_count=rng.randint(1, 20))
    return r, "buffer_overflow"


def snmp_traffic():
    r = base()
    r.update(protocol_type="udp", service="snmp", src_bytes=rng.randint(100, 110), dst_bytes=rng.randint(100, 110),
             count=rng.randint(1, 500), srv_count=rng.randint(1, 500), same_srv_rate=rate(0.9, 1.0),
             dst_host_count=rng.randint(100, 255), dst_host_srv_count=rng.randint(100, 255),
             dst_host_same_srv_rate=rate(0.4, 1.0), dst_host_same_src_port_rate=rate(0.0, 0.5))
    return r


def normal_snmp():
    return snmp_traffic(), "normal"


def snmpgetattack():
    # indistinguishable from normal snmp traffic, as in the real data
    return snmp_traffic(), "snmpgetattack"


PROFILES = [
    (normal, 500),
    (normal_snmp, 30),
    (neptune, 230),
    (smurf, 40),
    (portsweep, 40),
    (satan, 50),
    (guess_passwd, 20),
    (warezclient, 30),
    (snmpgetattack, 30),
    (buffer_overflow, 30),
]

rows = []
for make, n in PROFILES:
    for _ in range(n):
        r, label = make()
        rows.append((r, label))
rng.shuffle(rows)

for r, label in rows:
    values = [str(v) for v in r.values()]
    assert len(values) == 41
    print(",".join(values + [label, str(rng.randint(5, 21))]))
