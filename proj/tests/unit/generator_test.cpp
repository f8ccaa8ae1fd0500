#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "stub_server.hpp"
#include "streamlink/gen/prompt.hpp"
#include "streamlink/gen/remote_backend.hpp"
#include "streamlink/gen/template_backend.hpp"
#include "streamlink/sql/normalize.hpp"
#include "streamlink/sql/parser.hpp"
#include "streamlink/storage/executor.hpp"

using namespace streamlink;
using namespace streamlink::gen;

namespace {

const std::string kDataDir = STREAMLINK_TEST_DATA_DIR;
const std::string kGoldenDir = STREAMLINK_TEST_GOLDEN_DIR;

sql::Schema patent_schema() { return sql::Schema::load(kDataDir + "/schema.json"); }
TemplateBackend patent_backend() { return TemplateBackend(SynonymMap::load(kDataDir + "/synonyms.json")); }

std::string canon(std::string_view sql) { return sql::canonical_text(sql::parse(sql)); }

std::string code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Prompt, NoExemplarsMeansNoExampleSection) {
  auto schema = patent_schema();
  auto p = build_prompt(schema, {}, "count patents");
  EXPECT_NE(p.text.find("### Task"), std::string::npos);
  EXPECT_NE(p.text.find("google_full(patent_id text, assignee text, cpc text, grant_date date, title text)"),
            std::string::npos);
  EXPECT_EQ(p.text.find("### Examples"), std::string::npos);
  EXPECT_NE(p.text.find("count patents"), std::string::npos);
}

TEST(Prompt, ExemplarsVerbatimInOrder) {
  auto schema = patent_schema();
  std::vector<Exemplar> ex = {{"second one", "SELECT title FROM google_full"},
                              {"first one", "SELECT cpc FROM google_full WHERE cpc = 'G06F'"}};
  auto text = build_prompt(schema, ex, "q").text;
  auto a = text.find("Request: second one\nSQL: SELECT title FROM google_full\n");
  auto b = text.find("Request: first one\nSQL: SELECT cpc FROM google_full WHERE cpc = 'G06F'\n");
  ASSERT_NE(a, std::string::npos);
  ASSERT_NE(b, std::string::npos);
  EXPECT_LT(a, b);
  EXPECT_EQ(text, build_prompt(schema, ex, "q").text);
}

TEST(Prompt, InvalidExemplarNamed) {
  auto schema = patent_schema();
  std::vector<Exemplar> ex = {{"ok", "SELECT cpc FROM google_full"}, {"bad", "SELECT inventor FROM google_full"}};
  try {
    build_prompt(schema, ex, "q");
    FAIL();
  } catch (const GenerateError& e) {
    EXPECT_EQ(e.code(), "ExemplarInvalid");
    EXPECT_NE(std::string(e.what()).find("exemplar 2"), std::string::npos);
  }
  std::vector<Exemplar> drop = {{"x", "DROP TABLE google_full"}};
  EXPECT_EQ(code_of([&] { build_prompt(schema, drop, "q"); }), "ExemplarInvalid");
  std::vector<Exemplar> other = {{"x", "SELECT a FROM elsewhere"}};
  EXPECT_EQ(code_of([&] { build_prompt(schema, other, "q"); }), "ExemplarInvalid");
}

TEST(Prompt, GoldenForBundledSchema) {
  auto schema = patent_schema();
  auto exemplars = load_exemplars(kDataDir + "/exemplars.json");
  auto text = build_prompt(schema, exemplars, testkit::kIntelQuestion).text;
  const std::string golden = kGoldenDir + "/prompt_patents.txt";
  if (std::getenv("STREAMLINK_UPDATE_GOLDEN") != nullptr) std::ofstream(golden, std::ios::binary) << text;
  EXPECT_EQ(text, slurp(golden));
}

TEST(TemplateBackend, AnalystQuestionGivesExampleSql) {
  auto backend = patent_backend();
  auto schema = patent_schema();
  auto res = backend.generate({std::string(testkit::kIntelQuestion), &schema});
  ASSERT_EQ(res.candidates.size(), 1u);
  EXPECT_EQ(res.backend, "template");
  EXPECT_EQ(canon(res.candidates[0]), canon(testkit::kIntelTopCpcSql));
}

TEST(TemplateBackend, CountAfterYear) {
  auto backend = patent_backend();
  auto schema = patent_schema();
  auto res = backend.generate({"count patents granted after 2015", &schema});
  EXPECT_EQ(canon(res.candidates[0]), "select count(*) from google_full where grant_date >= '2015'");
}

TEST(TemplateBackend, NoIntentIsNoMatch) {
  auto backend = patent_backend();
  auto schema = patent_schema();
  EXPECT_EQ(code_of([&] { backend.generate({"please do something", &schema}); }), "NoMatch");
  EXPECT_EQ(code_of([&] { backend.generate({"show me something", &schema}); }), "NoMatch");
  EXPECT_EQ(code_of([&] { backend.generate({"   ", &schema}); }), "InvalidArgument");
  EXPECT_EQ(code_of([&] { backend.generate({"count patents", nullptr}); }), "InvalidArgument");
}

TEST(TemplateBackend, IntentTable) {
  auto backend = patent_backend();
  auto schema = patent_schema();
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"how many patents were granted in 2019", "select count(*) from google_full where grant_date like '2019%'"},
      {"count patents by cpc",
       "select cpc, count(*) as count from google_full group by cpc order by count desc"},
      {"number of patents per assignee granted before 2000",
       "select assignee, count(*) as count from google_full where grant_date < '2000' group by assignee order by count desc"},
      {"show 5 patents from Samsung Electronics since 2020-06-01",
       "select * from google_full where assignee like '%Samsung Electronics%' and grant_date >= '2020-06-01' limit 5"},
      {"list patents with cpc G06F granted on 2015-03-04",
       "select * from google_full where cpc = 'G06F' and grant_date = '2015-03-04'"},
      {"find the first 3 patents titled \"Secure memory controller\"",
       "select * from google_full where title like '%Secure memory controller%' limit 3"},
      {"top 5 assignees for cpc H01L",
       "select assignee, count(*) as count from google_full where cpc = 'H01L' group by assignee order by count desc limit 5"},
      {"most common classification of Intel patents",
       "select cpc, count(*) as count from google_full where assignee like '%Intel%' group by cpc order by count desc limit 10"},
      {"show patents by the company of \"O'Reilly Labs\"",
       "select * from google_full where assignee like '%O''Reilly Labs%'"},
  };
  for (const auto& [nl, want] : cases) {
    try {
      auto res = backend.generate({nl, &schema});
      EXPECT_EQ(canon(res.candidates[0]), want) << nl;
    } catch (const Error& e) {
      ADD_FAILURE() << nl << ": " << e.what();
    }
  }
}

TEST(TemplateBackend, DeterministicAndAlwaysBinds) {
  auto backend = patent_backend();
  auto schema = patent_schema();
  const auto& table = schema.table("google_full");
  const std::vector<std::string> subjects = {"Intel", "Apple Inc.", "\"Texas Instruments\"", "Sony Group"};
  const std::vector<std::string> dates = {"2009", "2015-01", "2020-12-31"};
  for (const auto& s : subjects) {
    for (const auto& d : dates) {
      for (const std::string& pattern :
           {"top 3 cpc by the assignee of S after D", "count patents from S before D", "list patents by S in D",
            "how many patents per cpc for company S since D"}) {
        std::string nl = pattern;
        nl.replace(nl.find('S'), 1, s);
        nl.replace(nl.find('D'), 1, d);
        auto a = backend.generate({nl, &schema});
        auto b = backend.generate({nl, &schema});
        EXPECT_EQ(a.candidates, b.candidates);
        auto stmt = sql::parse(a.candidates[0]);
        ASSERT_TRUE(stmt.is<sql::Select>()) << nl;
        EXPECT_NO_THROW(storage::BoundQuery(stmt.as<sql::Select>(), table)) << a.candidates[0];
      }
    }
  }
}

TEST(TemplateBackend, DefaultSynonymsFromSchema) {
  auto schema = patent_schema();
  TemplateBackend backend(SynonymMap::defaults_for(schema.table("google_full")));
  auto res = backend.generate({"count google_full with cpc G06F", &schema});
  EXPECT_EQ(canon(res.candidates[0]), "select count(*) from google_full where cpc like '%G06F%'");
}

TEST(ExtractSql, Rules) {
  EXPECT_EQ(extract_sql("SELECT a FROM t"), "SELECT a FROM t");
  EXPECT_EQ(extract_sql("Sure!\n```sql\nSELECT a\nFROM t;\n```\nDone"), "SELECT a\nFROM t;");
  EXPECT_EQ(extract_sql("Here you go:\nselect a from t; -- trailing\nthanks"), "select a from t");
  EXPECT_EQ(extract_sql("SELECT ';' FROM t; DROP TABLE t"), "SELECT ';' FROM t");
  EXPECT_EQ(extract_sql("The answer is\nSELECT 'open"), "The answer is");
  EXPECT_EQ(extract_sql("x' OR '1'='1"), "x' OR '1'='1");
  EXPECT_EQ(extract_sql(" \n\t\n"), std::nullopt);
  EXPECT_EQ(extract_sql("```\n\n```"), std::nullopt);
}

TEST(RemoteBackend, EchoAndFenced) {
  testkit::StubServer server;
  server.complete_with("/echo", "SELECT cpc FROM google_full");
  server.complete_with("/fenced", "```sql\nSELECT title FROM google_full\n```");
  std::string seen_prompt;
  server.post("/inspect", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    seen_prompt = body.at("prompt").get<std::string>();
    EXPECT_EQ(body.at("max_tokens").get<int>(), 256);
    EXPECT_EQ(body.at("temperature").get<double>(), 0.0);
    res.set_content(R"({"choices":[{"text":"SELECT cpc FROM google_full"}]})", "application/json");
  });
  server.start();
  auto schema = patent_schema();

  RemoteBackend echo("llm", net::CompletionClient(net::Endpoint::parse(server.url("/echo")), {}));
  auto r = echo.generate({"anything", &schema});
  EXPECT_EQ(r.candidates, std::vector<std::string>{"SELECT cpc FROM google_full"});
  EXPECT_NE(r.prompt.find("### Request\nanything\n"), std::string::npos);

  RemoteBackend fenced("llm", net::CompletionClient(net::Endpoint::parse(server.url("/fenced")), {}));
  EXPECT_EQ(fenced.generate({"anything", &schema}).candidates[0], "SELECT title FROM google_full");

  net::CompletionOptions opts;
  opts.adapter.text_pointer = "/choices/0/text";
  RemoteBackend openai("llm", net::CompletionClient(net::Endpoint::parse(server.url("/inspect")), opts));
  EXPECT_EQ(openai.generate({"q?", &schema}).candidates[0], "SELECT cpc FROM google_full");
  EXPECT_NE(seen_prompt.find("q?"), std::string::npos);
}

TEST(RemoteBackend, Failures) {
  testkit::StubServer server;
  server.complete_with("/empty", "   ");
  server.post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content(R"({"text":"SELECT 1"})", "application/json");
  });
  server.post("/garbage", [](const httplib::Request&, httplib::Response& res) { res.set_content("nope", "text/plain"); });
  server.start();
  auto schema = patent_schema();
  auto backend_at = [&](const std::string& url, std::chrono::milliseconds timeout) {
    net::CompletionOptions opts;
    opts.timeout = timeout;
    return RemoteBackend("llm", net::CompletionClient(net::Endpoint::parse(url), opts));
  };

  EXPECT_EQ(code_of([&] { backend_at(server.url("/empty"), std::chrono::seconds(5)).generate({"q", &schema}); }),
            "EmptyCompletion");
  EXPECT_EQ(code_of([&] { backend_at(server.url("/garbage"), std::chrono::seconds(5)).generate({"q", &schema}); }),
            "BackendProtocol");

  auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { backend_at(server.url("/slow"), std::chrono::milliseconds(300)).generate({"q", &schema}); }),
            "BackendTimeout");
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(1200));

  auto closed = "http://127.0.0.1:" + std::to_string(testkit::closed_port()) + "/x";
  start = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { backend_at(closed, std::chrono::seconds(2)).generate({"q", &schema}); }),
            "BackendUnreachable");
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(2));
}

TEST(Endpoint, Parse) {
  auto ep = net::Endpoint::parse("http://10.0.0.5:8081/v1/complete");
  EXPECT_EQ(ep.host, "10.0.0.5");
  EXPECT_EQ(ep.port, 8081);
  EXPECT_EQ(ep.path, "/v1/complete");
  EXPECT_EQ(net::Endpoint::parse("localhost").port, 80);
  EXPECT_THROW(net::Endpoint::parse("https://x"), net::NetError);
  EXPECT_THROW(net::Endpoint::parse("http://x:notaport/"), net::NetError);
}

TEST(ReplayBackend, ServesStoredAnswers) {
  ReplayBackend replay(std::map<std::string, std::string>{{"q1", "SELECT a FROM t"}});
  auto schema = patent_schema();
  EXPECT_EQ(replay.generate({"  q1 ", &schema}).candidates[0], "SELECT a FROM t");
  EXPECT_EQ(code_of([&] { replay.generate({"q2", &schema}); }), "NoMatch");
}
