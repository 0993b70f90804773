package tests;

public class AnswerTest {
    public static boolean nonEmpty() {
        return app.Answer.word().length() > 0;
    }

    public static boolean spelled() {
        return app.Answer.word().equals("forty-two");
    }
}
