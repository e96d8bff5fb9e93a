"""CICIoT2023 flow-feature schema and label taxonomy.

The raw CSV shards carry 46 feature columns plus a ``label`` column. Six
of the 46 are constant in practice (Drate, ece/cwr flags, Telnet, SMTP,
IRC) and fall to the zero-variance cut, leaving the canonical 40-feature
layout used everywhere downstream.
"""

from __future__ import annotations

from .dataset import FeatureSchema, LabelTaxonomy

# Canonical 40 retained features, index 0-39.
CICIOT_FEATURES: tuple[str, ...] = (
    "flow_duration",      # 0
    "Header_Length",      # 1
    "Protocol Type",      # 2
    "Duration",           # 3
    "Rate",               # 4
    "Srate",              # 5
    "fin_flag_number",    # 6
    "syn_flag_number",    # 7
    "rst_flag_number",    # 8
    "psh_flag_number",    # 9
    "ack_flag_number",    # 10
    "ack_count",          # 11
    "syn_count",          # 12
    "fin_count",          # 13
    "urg_count",          # 14
    "rst_count",          # 15
    "HTTP",               # 16
    "HTTPS",              # 17
    "DNS",                # 18
    "SSH",                # 19
    "TCP",                # 20
    "UDP",                # 21
    "ARP",                # 22
    "ICMP",               # 23
    "IPv",                # 24
    "LLC",                # 25
    "Tot sum",            # 26
    "Min",                # 27
    "Max",                # 28
    "AVG",                # 29
    "Std",                # 30
    "Tot size",           # 31
    "IAT",                # 32
    "Number",             # 33
    "Magnitude",          # 34
    "Radius",             # 35
    "Covariance",         # 36
    "Variance",           # 37
    "Weight",             # 38
    "DHCP",               # 39
)

# Columns that are constant in the shards and removed by the
# zero-variance cut (46 -> 40).
CICIOT_CONSTANT_FEATURES: tuple[str, ...] = (
    "Drate",
    "ece_flag_number",
    "cwr_flag_number",
    "Telnet",
    "SMTP",
    "IRC",
)

# Raw shard layout: 46 columns, ordered so that removing the constant six
# leaves exactly the canonical indexing above (rst_count at 15, IAT at 32).
CICIOT_RAW_FEATURES: tuple[str, ...] = (
    "flow_duration", "Header_Length", "Protocol Type", "Duration",
    "Rate", "Srate", "Drate",
    "fin_flag_number", "syn_flag_number", "rst_flag_number",
    "psh_flag_number", "ack_flag_number", "ece_flag_number",
    "cwr_flag_number",
    "ack_count", "syn_count", "fin_count", "urg_count", "rst_count",
    "HTTP", "HTTPS", "DNS", "Telnet", "SMTP", "SSH", "IRC",
    "TCP", "UDP", "ARP", "ICMP", "IPv", "LLC",
    "Tot sum", "Min", "Max", "AVG", "Std", "Tot size", "IAT",
    "Number", "Magnitude", "Radius", "Covariance", "Variance", "Weight",
    "DHCP",
)

RAW_WIDTH = len(CICIOT_RAW_FEATURES)  # 46

# Subcategory -> class. 33 attack types plus Benign, seven attack classes.
CICIOT_CLASS_OF: dict[str, str] = {
    "DDoS-ICMP_Flood": "DDoS",
    "DDoS-UDP_Flood": "DDoS",
    "DDoS-TCP_Flood": "DDoS",
    "DDoS-PSHACK_Flood": "DDoS",
    "DDoS-SYN_Flood": "DDoS",
    "DDoS-RSTFINFlood": "DDoS",
    "DDoS-SynonymousIP_Flood": "DDoS",
    "DDoS-ICMP_Fragmentation": "DDoS",
    "DDoS-UDP_Fragmentation": "DDoS",
    "DDoS-ACK_Fragmentation": "DDoS",
    "DDoS-HTTP_Flood": "DDoS",
    "DDoS-SlowLoris": "DDoS",
    "DoS-UDP_Flood": "DoS",
    "DoS-TCP_Flood": "DoS",
    "DoS-SYN_Flood": "DoS",
    "DoS-HTTP_Flood": "DoS",
    "Mirai-greeth_flood": "Mirai",
    "Mirai-udpplain": "Mirai",
    "Mirai-greip_flood": "Mirai",
    "MITM-ArpSpoofing": "Spoofing",
    "DNS_Spoofing": "Spoofing",
    "Recon-HostDiscovery": "Recon",
    "Recon-OSScan": "Recon",
    "Recon-PortScan": "Recon",
    "Recon-PingSweep": "Recon",
    "VulnerabilityScan": "Recon",
    "BrowserHijacking": "Web",
    "Backdoor_Malware": "Web",
    "XSS": "Web",
    "Uploading_Attack": "Web",
    "SqlInjection": "Web",
    "CommandInjection": "Web",
    "DictionaryBruteForce": "Bruteforce",
    "Benign": "Benign",
}

CICIOT_CLASSES: tuple[str, ...] = (
    "DDoS", "DoS", "Mirai", "Spoofing", "Recon", "Web", "Bruteforce", "Benign",
)


def raw_schema() -> FeatureSchema:
    """Schema of an unprocessed 46-column shard."""
    return FeatureSchema(names=CICIOT_RAW_FEATURES)


def table_schema() -> FeatureSchema:
    """Canonical 40-feature schema after the zero-variance cut."""
    return FeatureSchema(names=CICIOT_FEATURES)


def taxonomy() -> LabelTaxonomy:
    binary_of = {c: 0 if c == "Benign" else 1 for c in CICIOT_CLASSES}
    return LabelTaxonomy(class_of=dict(CICIOT_CLASS_OF), binary_of=binary_of)
