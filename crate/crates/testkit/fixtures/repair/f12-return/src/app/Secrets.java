package app;

public class Secrets {
    public static String token() {
        return "tok-" + 9157;
    }
}
