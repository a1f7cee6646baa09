#include "fla2csp/corpus.hpp"

#include <algorithm>

#include "fla2csp/diag.hpp"

namespace fla2csp::corpus {

namespace {

// --- centralized case -----------------------------------------------------

const char* kCentralizedPy = R"PY(
def fl_centralized(nodeId, localData, privateData):
    for k in range(noIterations):
        if nodeId == flSrvId:
            broadcastMsg(addresses, localData, nodeId)
            msgs = rcvMsgs(noNodes - 1)
        else:
            msg = rcvMsg()
            sendMsg(flSrvAddress, localData)
    terminated = 1
)PY";

const char* kCentralizedConfig = R"CFG(
no_nodes = 3
fl_srv_id = 0
no_iterations = 3
system_name = SysCentralized
)CFG";

const char* kCentralizedCsp = R"CSP(enum {False, True};
#define NoNodes 3;
#define FlSrvId 0;
#define NoIterations 3;
var ldataArr[NoNodes];
var pdataArr[NoNodes];
var terminated = False;
var bufferSize[NoNodes];
channel nodeChannels[NoNodes] NoNodes - 1;
channel buffer[NoNodes] NoNodes - 1;
Fl_centralized(nodeId, ldata, pdata) =
  Fl_centralizedT(0, nodeId, ldata, pdata);
Fl_centralizedT(k, nodeId, ldata, pdata) =
  if (k < NoIterations) {
    if (nodeId == FlSrvId) {
      BroadcastMsg(ldata, nodeId);
      RcvMsgs(nodeId, NoNodes - 1);
      Fl_centralizedT(k + 1, nodeId, ldata, pdata)
    } else {
      nodeChannels[nodeId]?msg ->
      nodeChannels[FlSrvId]!ldata ->
      Fl_centralizedT(k + 1, nodeId, ldata, pdata)
    }
  } else {
    {terminated = True} ->
    Skip
  };
BroadcastMsg(msg, senderId) =
  BroadcastMsgT(0, NoNodes, msg, senderId);
BroadcastMsgT(i, noNodes, msg, senderId) =
  if (i < noNodes) {
    if (i != senderId) {
      nodeChannels[i]!msg ->
      Skip
    };
    BroadcastMsgT(i + 1, noNodes, msg, senderId)
  };
RcvMsgs(nodeId, noMsgs) =
  if (bufferSize[nodeId] != 0) {
    ClearBuffT(nodeId)
  };
  RcvMsgsT(0, nodeId, noMsgs);
ClearBuffT(nodeId) =
  {bufferSize[nodeId]--} ->
  buffer[nodeId]?temp ->
  if (bufferSize[nodeId] != 0) {
    ClearBuffT(nodeId)
  };
RcvMsgsT(i, nodeId, noMsgs) =
  if (i < noMsgs) {
    {bufferSize[nodeId]++} ->
    nodeChannels[nodeId]?temp ->
    buffer[nodeId]!temp ->
    RcvMsgsT(i + 1, nodeId, noMsgs)
  };
SysCentralized() = |||nodeId:{0..NoNodes - 1}@Fl_centralized(nodeId, ldataArr[nodeId], pdataArr[nodeId]);
#define Terminated (terminated == True);
#assert SysCentralized() deadlockfree;
#assert SysCentralized() reaches Terminated;
#assert SysCentralized() |= []<> Terminated;
)CSP";

// --- decentralized case ---------------------------------------------------

const char* kDecentralizedPy = R"PY(
def fl_decentralized(nodeId, localData, privateData):
    msgIterNo = 0
    msgSeqNo = 1
    msgSrcAdr = 2
    msgData = 3
    PHASE1 = 1
    PHASE2 = 2
    for iterNo in range(noIterations):
        broadcastMsg(addresses, [iterNo, PHASE1, nodeId, localData], nodeId)
        noRcvdMsgs = 0
        while len(dataFromClients1) > 0:
            msg = dataFromClients1.pop(0)
            noRcvdMsgs = noRcvdMsgs + 1
            sendMsg(msg[msgSrcAdr], [iterNo, PHASE2, nodeId, localData])
        while noRcvdMsgs != 2 * noNeighbors:
            msg = rcvMsg()
            if msg[msgIterNo] != iterNo:
                dataFromClients1.append(msg)
                continue
            noRcvdMsgs = noRcvdMsgs + 1
            if msg[msgSeqNo] == PHASE1:
                sendMsg(msg[msgSrcAdr], [iterNo, PHASE2, nodeId, localData])
            else:
                dataFromClients2.append(msg[msgData])
        dropMsgsFromClients2(dataFromClients2)
    terminated = 1
)PY";

const char* kDecentralizedConfig = R"CFG(
no_nodes = 3
no_iterations = 3
node_channel_capacity = 2 * (NoNodes - 1)
system_name = SysDecentralized
define.NoNeighbors = NoNodes - 1
fifo.dataFromClients1 = NoNodes - 1
fifo.dataFromClients2 = NoNodes - 1
)CFG";

const char* kDecentralizedCsp = R"CSP(enum {False, True};
#define NoNodes 3;
#define NoIterations 3;
#define NoNeighbors NoNodes - 1;
#define PHASE1 1;
#define PHASE2 2;
var ldataArr[NoNodes];
var pdataArr[NoNodes];
var terminated = False;
var noRcvdMsgs[NoNodes];
channel nodeChannels[NoNodes] 2 * (NoNodes - 1);
channel dataFromClients1[NoNodes] NoNodes - 1;
channel dataFromClients2[NoNodes] NoNodes - 1;
Fl_decentralized(nodeId, ldata, pdata) =
  Fl_decentralizedT(nodeId, ldata, pdata, 0);
Fl_decentralizedT(nodeId, ldata, pdata, iterNo) =
  if (iterNo < NoIterations) {
    BroadcastMsg(iterNo, PHASE1, nodeId, ldata, nodeId);
    {noRcvdMsgs[nodeId] = 0} ->
    DrainBuffer(nodeId, iterNo, ldata, call(ccount, dataFromClients1[nodeId]));
    Fl_decentralized_Phase2(nodeId, ldata, pdata, iterNo)
  } else {
    {terminated = True} ->
    Skip
  };
Fl_decentralized_Phase2(nodeId, ldata, pdata, iterNo) =
  if (noRcvdMsgs[nodeId] < 2 * NoNeighbors) {
    nodeChannels[nodeId]?msgIterNo.msgSeqNo.msgSrcAdr.msgData ->
    if (msgIterNo != iterNo) {
      dataFromClients1[nodeId]!msgIterNo.msgSeqNo.msgSrcAdr.msgData ->
      Fl_decentralized_Phase2(nodeId, ldata, pdata, iterNo)
    } else {
      {noRcvdMsgs[nodeId]++} ->
      if (msgSeqNo == PHASE1) {
        nodeChannels[msgSrcAdr]!iterNo.PHASE2.nodeId.ldata ->
        Fl_decentralized_Phase2(nodeId, ldata, pdata, iterNo)
      } else {
        dataFromClients2[nodeId]!msgData ->
        Fl_decentralized_Phase2(nodeId, ldata, pdata, iterNo)
      }
    }
  } else {
    DropMsgsFromClients2(nodeId, call(ccount, dataFromClients2[nodeId]));
    Fl_decentralizedT(nodeId, ldata, pdata, iterNo + 1)
  };
DrainBuffer(nodeId, iterNo, ldata, count) =
  if (count > 0) {
    dataFromClients1[nodeId]?msgIterNo.msgSeqNo.msgSrcAdr.msgData ->
    {noRcvdMsgs[nodeId]++} ->
    nodeChannels[msgSrcAdr]!iterNo.PHASE2.nodeId.ldata ->
    DrainBuffer(nodeId, iterNo, ldata, count - 1)
  } else {
    Skip
  };
DropMsgsFromClients2(nodeId, count) =
  if (count > 0) {
    dataFromClients2[nodeId]?msg ->
    DropMsgsFromClients2(nodeId, count - 1)
  } else {
    Skip
  };
BroadcastMsg(m1, m2, m3, m4, senderId) =
  BroadcastMsgT(0, NoNodes, m1, m2, m3, m4, senderId);
BroadcastMsgT(i, noNodes, m1, m2, m3, m4, senderId) =
  if (i < noNodes) {
    if (i != senderId) {
      nodeChannels[i]!m1.m2.m3.m4 ->
      Skip
    };
    BroadcastMsgT(i + 1, noNodes, m1, m2, m3, m4, senderId)
  };
SysDecentralized() = |||nodeId:{0..NoNodes - 1}@Fl_decentralized(nodeId, ldataArr[nodeId], pdataArr[nodeId]);
#define Terminated (terminated == True);
#assert SysDecentralized() deadlockfree;
#assert SysDecentralized() reaches Terminated;
#assert SysDecentralized() |= []<> Terminated;
)CSP";

// --- mutant construction --------------------------------------------------

std::string replace_nth(std::string text, const std::string& from, const std::string& to,
                        int occurrence = 1) {
  std::size_t pos = 0;
  for (int i = 0; i < occurrence; ++i) {
    pos = text.find(from, i == 0 ? 0 : pos + 1);
    if (pos == std::string::npos)
      throw UnknownCase("mutant edit target not found: " + from.substr(0, 40));
  }
  text.replace(pos, from.size(), to);
  return text;
}

int line_of(const std::string& text, const std::string& needle, int occurrence = 1) {
  std::size_t pos = 0;
  for (int i = 0; i < occurrence; ++i) {
    pos = text.find(needle, i == 0 ? 0 : pos + 1);
    if (pos == std::string::npos)
      throw UnknownCase("mutant line marker not found: " + needle.substr(0, 40));
  }
  return 1 + static_cast<int>(
                 std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

std::vector<Mutant> centralized_mutants(const std::string& golden) {
  std::vector<Mutant> out;
  {
    Mutant m;
    m.name = "arrow-after-broadcast-call";
    m.csp_text = replace_nth(golden, "BroadcastMsg(ldata, nodeId);",
                             "BroadcastMsg(ldata, nodeId) ->");
    m.expected_error_line = line_of(m.csp_text, "BroadcastMsg(ldata, nodeId) ->");
    m.note = "process call chained with '->' instead of ';'";
    out.push_back(std::move(m));
  }
  {
    Mutant m;
    m.name = "arrow-after-rcvmsgs-call";
    m.csp_text = replace_nth(golden, "RcvMsgs(nodeId, NoNodes - 1);",
                             "RcvMsgs(nodeId, NoNodes - 1) ->");
    m.expected_error_line = line_of(m.csp_text, "RcvMsgs(nodeId, NoNodes - 1) ->");
    m.note = "process call chained with '->' instead of ';'";
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Mutant> decentralized_mutants(const std::string& golden) {
  std::vector<Mutant> out;
  {
    Mutant m;
    m.name = "arrow-after-broadcast-call";
    m.csp_text =
        replace_nth(golden, "BroadcastMsg(iterNo, PHASE1, nodeId, ldata, nodeId);",
                    "BroadcastMsg(iterNo, PHASE1, nodeId, ldata, nodeId) ->");
    m.expected_error_line =
        line_of(m.csp_text, "BroadcastMsg(iterNo, PHASE1, nodeId, ldata, nodeId) ->");
    m.note = "process call chained with '->' instead of ';'";
    out.push_back(std::move(m));
  }
  {
    Mutant m;
    m.name = "unbraced-assignment";
    m.csp_text = replace_nth(golden, "{terminated = True} ->\n    Skip",
                             "terminated = True;\n    Skip");
    m.expected_error_line = line_of(m.csp_text, "terminated = True;");
    m.note = "assignment used as a bare process term without '{...} ->'";
    out.push_back(std::move(m));
  }
  {
    Mutant m;
    m.name = "arrow-after-drain-call";
    m.csp_text = replace_nth(
        golden, "DrainBuffer(nodeId, iterNo, ldata, call(ccount, dataFromClients1[nodeId]));",
        "DrainBuffer(nodeId, iterNo, ldata, call(ccount, dataFromClients1[nodeId])) ->");
    m.expected_error_line = line_of(
        m.csp_text,
        "DrainBuffer(nodeId, iterNo, ldata, call(ccount, dataFromClients1[nodeId])) ->");
    m.note = "process call chained with '->' instead of ';'";
    out.push_back(std::move(m));
  }
  {
    Mutant m;
    m.name = "drain-missing-ldata-param";
    std::string t = golden;
    t = replace_nth(t, "DrainBuffer(nodeId, iterNo, ldata, count) =",
                    "DrainBuffer(nodeId, iterNo, count) =");
    t = replace_nth(t, "DrainBuffer(nodeId, iterNo, ldata, count - 1)",
                    "DrainBuffer(nodeId, iterNo, count - 1)");
    t = replace_nth(t, "DrainBuffer(nodeId, iterNo, ldata, call(ccount",
                    "DrainBuffer(nodeId, iterNo, call(ccount");
    m.csp_text = t;
    // the body still reads ldata, now undeclared
    m.expected_error_line =
        line_of(m.csp_text, "nodeChannels[msgSrcAdr]!iterNo.PHASE2.nodeId.ldata ->", 2);
    m.note = "helper signature drops a parameter its body still uses";
    out.push_back(std::move(m));
  }
  {
    Mutant m;
    m.name = "drain-in-phase-process";
    m.is_syntax = false;
    std::string t = replace_nth(
        golden,
        "    DrainBuffer(nodeId, iterNo, ldata, call(ccount, dataFromClients1[nodeId]));\n"
        "    Fl_decentralized_Phase2(nodeId, ldata, pdata, iterNo)",
        "    Fl_decentralized_Phase2(nodeId, ldata, pdata, iterNo)");
    t = replace_nth(
        t,
        "  } else {\n"
        "    DropMsgsFromClients2(nodeId, call(ccount, dataFromClients2[nodeId]));",
        "  } else {\n"
        "    DrainBuffer(nodeId, iterNo, ldata, call(ccount, dataFromClients1[nodeId]));\n"
        "    DropMsgsFromClients2(nodeId, call(ccount, dataFromClients2[nodeId]));");
    m.csp_text = t;
    m.note = "stashed-message drain left at the end of the phase process instead of the "
             "start of the next round, so replies carry a stale round tag";
    out.push_back(std::move(m));
  }
  {
    Mutant m;
    m.name = "drain-skips-count";
    m.is_syntax = false;
    m.csp_text = replace_nth(
        golden,
        "    dataFromClients1[nodeId]?msgIterNo.msgSeqNo.msgSrcAdr.msgData ->\n"
        "    {noRcvdMsgs[nodeId]++} ->\n"
        "    nodeChannels[msgSrcAdr]!iterNo.PHASE2.nodeId.ldata ->\n"
        "    DrainBuffer",
        "    dataFromClients1[nodeId]?msgIterNo.msgSeqNo.msgSrcAdr.msgData ->\n"
        "    nodeChannels[msgSrcAdr]!iterNo.PHASE2.nodeId.ldata ->\n"
        "    DrainBuffer");
    m.note = "drained messages no longer counted toward the round's receive quota";
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names{"centralized", "decentralized"};
  return names;
}

CorpusCase load_case(const std::string& name) {
  CorpusCase c;
  c.name = name;
  if (name == "centralized") {
    c.python_source = kCentralizedPy;
    c.config_text = kCentralizedConfig;
    c.golden_csp = kCentralizedCsp;
    c.mutants = centralized_mutants(c.golden_csp);
  } else if (name == "decentralized") {
    c.python_source = kDecentralizedPy;
    c.config_text = kDecentralizedConfig;
    c.golden_csp = kDecentralizedCsp;
    c.mutants = decentralized_mutants(c.golden_csp);
  } else {
    throw UnknownCase(name);
  }
  return c;
}

}  // namespace fla2csp::corpus
