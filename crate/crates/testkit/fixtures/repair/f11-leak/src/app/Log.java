package app;

public class Log {
    public static String last = "";

    public static void write(String s) {
        last = last + s + ";";
    }
}
